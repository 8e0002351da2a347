import deepspeech
import numpy as np
m = deepspeech.Model('m.pbmm')
