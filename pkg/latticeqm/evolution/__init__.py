from latticeqm.evolution.evolution import *
