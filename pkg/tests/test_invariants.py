"""Cross-module cost and equivalence properties of the gradient engines."""

from rnnp.bench import sweep_tau
from rnnp.model import RnnSpec


class TestTrrlCostIndependentOfOrder:
    def test_fixed_weight_count_deviation_under_ten_percent(self):
        """At equal total parameter count (x adjusted to offset the extra
        feedback weights), the recombined sweep's cost deviates from its
        mean by well under 10% across orders 1..3: the per-lag work is a
        small additive term, not a multiplicative factor."""
        counts = []
        for lags, x in [((1,), 13), ((1, 2), 11), ((1, 2, 3), 9)]:
            spec = RnnSpec(lag_set=lags, x_dim=x, hidden_dim=15, y_dim=2)
            assert spec.weight_count == 272
            counts.append(sweep_tau("trrl", spec, [49])[0].mac_count)
        mean = sum(counts) / len(counts)
        for c in counts:
            assert abs(c / mean - 1.0) < 0.10


class TestBpttExponentialGrowth:
    def test_golden_ratio_growth_for_two_lags(self):
        spec = RnnSpec(lag_set=(1, 2), x_dim=1, hidden_dim=2, y_dim=1)
        records = sweep_tau("bptt", spec, list(range(15, 23)))
        phi = (1.0 + 5.0**0.5) / 2.0
        for a, b in zip(records, records[1:]):
            ratio = b.mac_count / a.mac_count
            assert abs(ratio - phi) <= 0.1 * phi
