# Test package for halo-slopes
