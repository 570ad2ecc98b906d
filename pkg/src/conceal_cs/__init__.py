"""Energy-concealment compressive-sensing encryption."""
