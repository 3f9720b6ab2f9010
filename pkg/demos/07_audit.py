"""
Axiom audit and deletion curves
===============================

A one-table health check of the estimator, and the area under a
confidence-drop curve.
"""

from gralis import DropCurve, axiomatic_audit, deletion_auc

for row in axiomatic_audit():
    print(f"{row['axiom']:<13} {row['measured']:.2e} {row['comparison']} {row['threshold']:.0e}  {row['status']}")

curve = DropCurve([0, 1, 3, 5], [0.0, -0.003, 0.025, 0.027])
print("deletion AUC:", round(deletion_auc(curve), 4))
