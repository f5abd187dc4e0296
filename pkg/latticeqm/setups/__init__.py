from latticeqm.setups.setup_algebra import *
from latticeqm.setups.setup_loaders import *
