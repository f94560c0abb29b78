"""Physical constants shared by every quantitative comparison in the package.

All SI.  Kept in one place so trap-depth/mass conversions are consistent
between the metric extractors, the Schroedinger cross-check and the
transport simulation.
"""

# Boltzmann constant, exact SI definition [J/K]
K_B = 1.380649e-23

# Reduced Planck constant [J s]
HBAR = 1.054571817e-34

# Mass of a cesium-133 atom [kg]
CS_MASS = 2.20694650e-25
