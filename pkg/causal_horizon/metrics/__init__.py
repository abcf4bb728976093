"""Set metrics, convergence verdicts and Busemann functions."""
