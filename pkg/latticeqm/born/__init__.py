from latticeqm.born.born_theorem import *
