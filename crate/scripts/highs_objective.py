#!/usr/bin/env python3
"""Solve an LP file with HiGHS and print the optimal objective, or "infeasible"."""
import sys

import highspy

h = highspy.Highs()
h.setOptionValue("output_flag", False)
h.readModel(sys.argv[1])
h.run()
status = h.getModelStatus()
if status == highspy.HighsModelStatus.kOptimal:
    print(round(h.getInfo().objective_function_value))
elif status == highspy.HighsModelStatus.kInfeasible:
    print("infeasible")
else:
    sys.exit(f"unexpected status {h.modelStatusToString(status)}")
