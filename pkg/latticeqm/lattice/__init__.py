from latticeqm.lattice.lattice_core import *
from latticeqm.lattice.lattice_loaders import *
