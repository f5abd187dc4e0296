from latticeqm.composite.composite_systems import *
