"""Self-similar profiles of coupled parabolic systems."""
