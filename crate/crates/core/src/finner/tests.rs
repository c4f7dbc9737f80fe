mod placeholder_f {}
