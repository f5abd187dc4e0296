from latticeqm.amplitudes.amplitude_engine import *
from latticeqm.amplitudes.amplitude_fuzz import *
