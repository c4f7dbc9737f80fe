mod placeholder_o {}
