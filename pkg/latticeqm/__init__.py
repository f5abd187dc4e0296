from latticeqm.lattice import *
from latticeqm.setups import *
from latticeqm.amplitudes import *
from latticeqm.evolution import *
from latticeqm.composite import *
from latticeqm.born import *
from latticeqm.regrade import *
