from latticeqm.regrade.regrade_catalog import *
from latticeqm.regrade.regrade_solver import *
