"""
Mixing of the reference configuration: one interval (-1, 1) with z = 1/2,
shifted by T = 1, 2, 4, 8, 16. Prints |R(z, T)| and writes the curve to
mixing.svg.
"""

import logging

import airyline
from airyline.output import Plot, Result, emit

logging.basicConfig(level=logging.INFO)

reference = airyline.CountingConfig.from_intervals([airyline.IntervalSpec(0.0, -1.0, 1.0, 0.5)])
experiment = airyline.MixingExperiment(reference, (1, 2, 4, 8, 16))

curve = airyline.mixing_sweep(experiment)
frame = curve.to_frame("abs_R")
print(frame[["T", "abs_R"]])
print("fitted decay rate:", airyline.fit_decay_rate(curve))

emit(Result(frame, plot=Plot("T", ("abs_R",), logx=True, logy=True)), "svg", "mixing.svg")
