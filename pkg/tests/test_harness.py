import math

import numpy as np
import pytest

from pulseconv import testimages
from pulseconv.errors import ConfigurationError, UnrealizableCoefficientError
from pulseconv.harness import (
    SweepSpec,
    budget,
    compare,
    is_monotone,
    reference_scale,
    sweep,
)
from pulseconv.imageio import scale_illumination
from pulseconv.planner import builtin, plan_kernel, quantize_plan
from pulseconv.sim import SimConfig

# clock in MHz for one 3x3 pass
CLOCKS_MHZ = {
    (64, 1000): 0.768, (128, 1000): 1.536, (192, 1000): 2.304, (256, 1000): 3.072,
    (64, 10000): 7.680, (128, 10000): 15.360, (192, 10000): 23.040, (256, 10000): 30.720,
}


class TestBudget:
    @pytest.mark.parametrize("key", sorted(CLOCKS_MHZ))
    def test_clock(self, key):
        s, fps = key
        assert round(budget((3, 3), s, fps).clock_mhz, 3) == CLOCKS_MHZ[key]

    def test_cycles(self):
        rep = budget((3, 3), 64, 1000)
        assert rep.cycles_per_frame == 768
        assert rep.clock_hz == 768_000

    def test_passes_add(self):
        plan = plan_kernel(builtin("log5"), 128)
        assert budget(plan, 128, 1000).cycles_per_frame == 3 * budget((5, 5), 128, 1000).cycles_per_frame
        assert budget((5, 5, 3), 128, 1000).cycles_per_frame == budget(plan, 128, 1000).cycles_per_frame

    def test_rejects_nonpositive(self):
        with pytest.raises(ConfigurationError):
            budget((3, 3), 0, 1000)
        with pytest.raises(ConfigurationError):
            budget((3, 3), 64, 0)


class TestCompare:
    def test_identity_is_exact(self, rng):
        plan = quantize_plan([([1.0], [1.0])], 256, gains=(1.0, 1.0))
        res = compare(rng.integers(0, 256, (8, 8)), plan, SimConfig())
        assert res.metrics.psnr_db == math.inf and res.metrics.mse == 0

    def test_edge2_quarter_illumination(self):
        img = scale_illumination(testimages.scene(32, seed=7), 0.25)
        res = compare(img, plan_kernel(builtin("edge2"), 256), SimConfig())
        assert res.metrics.psnr_db == math.inf and not res.saturated

    def test_reference_scales(self):
        plan = plan_kernel(builtin("sharpen"), 64)
        assert reference_scale(plan, "realized") == plan.realized_scale
        assert reference_scale(plan, "kernel") == 1.0
        assert reference_scale(plan, "full_rate") == pytest.approx(16 * plan.realized_scale)
        full = plan_kernel(builtin("sharpen"), 256)
        assert reference_scale(full, "full_rate") == full.realized_scale
        with pytest.raises(ConfigurationError):
            reference_scale(plan, "peak")

    def test_full_rate_equals_realized_at_full_rate(self, rng):
        img = rng.integers(0, 256, (12, 12))
        plan = plan_kernel(builtin("log5"), 256)
        a = compare(img, plan, SimConfig(), "full_rate").metrics
        b = compare(img, plan, SimConfig(), "realized").metrics
        assert a == b

    @pytest.mark.parametrize("name", ["edge1", "log5", "sharpen"])
    @pytest.mark.parametrize("s", [64, 128])
    def test_low_light_doubled_gain(self, name, s):
        # halving the light and doubling the stage gain halves the de-scaled error
        images = testimages.test_set(64, seed=2024, count=3)
        normal, low = [], []
        for img in images:
            normal.append(compare(img, plan_kernel(builtin(name), s), SimConfig(sample_rate=s)))
            dim = scale_illumination(img, 0.5)
            low.append(compare(dim, plan_kernel(builtin(name), 2 * s), SimConfig(sample_rate=2 * s)))
        pn = np.mean([c.metrics.psnr_db for c in normal])
        pl = np.mean([c.metrics.psnr_db for c in low])
        assert pl > pn


class TestSweep:
    def small(self, **kw):
        spec = SweepSpec(kernels=("edge2", "sharpen"), sample_rates=(64, 128),
                         illumination_factors=(1.0, 0.5), **kw)
        images = [("a", testimages.scene(16, seed=1)), ("b", testimages.scene(16, seed=2))]
        return spec, images

    def test_shape_and_labels(self):
        spec, images = self.small()
        res = sweep(spec, images)
        assert list(res.rows) == [("edge2", "a"), ("edge2", "b"), ("sharpen", "a"), ("sharpen", "b")]
        assert res.column_labels() == ["illum=1 S=64", "illum=1 S=128", "illum=0.5 S=64", "illum=0.5 S=128"]
        csv_lines = res.to_csv().splitlines()
        assert csv_lines[0] == "kernel,image,illum=1 S=64,illum=1 S=128,illum=0.5 S=64,illum=0.5 S=128"
        assert len(csv_lines) == 5
        md = res.to_markdown()
        assert md.startswith("| Kernel | Image |") and "0.768 MHz" in md

    def test_zero_image_all_inf(self):
        spec, _ = self.small()
        res = sweep(spec, [("black", np.zeros((8, 8), dtype=np.uint8))])
        assert all(c == math.inf for cells in res.rows.values() for c in cells)
        assert "inf" in res.to_csv()

    def test_jobs_match_serial(self):
        spec, images = self.small()
        assert sweep(spec, images, jobs=4).rows == sweep(spec, images).rows

    def test_higher_rate_not_worse(self):
        spec, images = self.small()
        for cells in sweep(spec, images).rows.values():
            assert cells[1] >= cells[0] and cells[3] >= cells[2]

    def test_bad_sweep_config(self):
        with pytest.raises(ConfigurationError):
            SweepSpec(sample_rates=(300,))
        with pytest.raises(ConfigurationError):
            SweepSpec(illumination_factors=(0.0,))

    def test_cell_error_has_context(self):
        spec, images = self.small(gains=(1.0, 1.0))
        with pytest.raises(UnrealizableCoefficientError, match="kernel=edge2 image=a S=64"):
            sweep(spec, images)


def test_is_monotone():
    assert is_monotone([1, 2, 2, math.inf, math.inf])
    assert not is_monotone([3, 2])
    assert not is_monotone([math.inf, 50])
