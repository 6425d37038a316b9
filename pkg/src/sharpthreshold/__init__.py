"""Sharp thresholds for boolean functions, applied to percolation models.

The package has one module per subsystem:

- ``boolfn``        exact truth-table analysis under product measures
- ``spectral``      Fourier-Walsh transforms, noise operator, hypercontractivity spot-check
- ``threshold``     Margulis-Russo derivative, Talagrand/symmetric bounds, window tools
- ``decisiontree``  query algorithms, stopping times, revealments, OSSS inequality
- ``lattice``       boxes in Z^d, rectangles in Z^2, planar duality
- ``percolation``   Bernoulli percolation sampling, crossings, Newman-Ziff sweeps
- ``randomcluster`` finite-volume random-cluster model with exact enumeration
- ``graphprops``    Erdos-Renyi graph property experiments
- ``cli``           command-line experiment runner
"""

__version__ = "0.1.0"
