"""Two-spin systems on planar graphs: exact partition functions, cylinder gadgets, reduction instances and a Baker-style scheme."""
