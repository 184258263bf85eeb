"""
Deep forest on drifting 8x8 digits
==================================

The digits are shuffled, doubled with every class shifted by one, and the
two halves are blended with a sigmoid drift. We compare the full deep
forest (scanning input layer plus cascade) with the cascade-only variant
and print which cascade sublayer ends up producing the output.

Takes a couple of minutes; lower N for a quicker look.
"""

from sklearn.datasets import load_digits

from driftforest import (AdaptiveDeepForest, AdfConfig, Instance, make_class_shift_stream,
                         make_gradual_sigmoid_drift, run_prequential)

N = 1797
X, y = load_digits(return_X_y=True)
data = [Instance(x / 16.0, int(label), 8) for x, label in zip(X[:N], y[:N])]

doubled = make_class_shift_stream(data, seed=0, class_count=10)
stream = list(make_gradual_sigmoid_drift(doubled[:N], doubled[N:], center=N, width=int(0.2 * N), seed=0))
print(len(stream), "instances")

for carf in (False, True):
    cfg = AdfConfig(n_classes=10, dims=2, size=8, depth=2, n_trees=10, carf=carf, seed=1)
    model = AdaptiveDeepForest(cfg)
    res = run_prequential(model, stream, 10, emit_every=500)
    name = "cascade only" if carf else "full model  "
    print(f"{name} accuracy {res.accuracy():.3f}  kappa {res.kappa():.3f}  "
          f"{(res.update_ms + res.predict_ms) / res.n:.1f} ms/instance")
    for rec in res.records:
        print(f"   idx {rec.idx:5d}  windowed {rec.win_acc:.3f}  cumulative {rec.cum_acc:.3f}")
    w = model.weights()
    print("   sublayer weights", [round(a, 3) for a in w["alpha"]])
    print("   average tree depth per sublayer", [round(d, 2) for d in model.depth_report()])
