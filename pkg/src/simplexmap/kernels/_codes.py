# integer map codes shared by both paths; order follows maps.MapKind
BB, RB, LAMBDA, H2D, TRAP, H2DPAD, H3D = range(7)
