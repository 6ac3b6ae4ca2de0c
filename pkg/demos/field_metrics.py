"""Score a perturbed 3D field against its ground truth.

A pseudo ground-truth volume comes from the anchor physics; the "prediction"
is the same field with noise and a vertical wobble.  The script reports the
headline metrics in their proper domains, the multi-scale gradient loss,
the vertical-gradient error CDF, and the histogram statistics used to
compare representation spaces.
"""

import numpy as np

from radiofront import (
    CityParams,
    GradLossConfig,
    RadioField,
    RxConfig,
    UNIT_DB,
    gen_field,
    gen_scene,
    grad3d_loss,
    hist_stats,
    metric_report,
    normalize_db,
    vertical_grad_error_cdf,
)

params = CityParams(
    side_px=64, resolution=1.0, n_buildings=8,
    height_range=(6.6, 19.8), footprint_range=(6, 14), seed=11,
)
scene = gen_scene(params, rx=RxConfig(z_rx=2.0, n_z=4, dz=1.0))
gt = gen_field(scene, noise_sigma=0.0, smooth_sigma=1.0)

rng = np.random.default_rng(2)
wobble = np.linspace(-1.5, 1.5, gt.n_z)[:, None, None]
pred = RadioField(gt.values + rng.normal(0, 2.0, gt.values.shape) + wobble, UNIT_DB)

report = metric_report(pred, gt, lo=-47.0, hi=-169.0)
print(f"nmse   {report.nmse:.4f}")
print(f"rmse   {report.rmse_db:.3f} dB")
print(f"ssim   {report.ssim:.4f}")
print(f"psnr   {report.psnr:.2f} dB")

cfg = GradLossConfig(scales=(1, 2, 4), lambda_z=0.5)
grad = grad3d_loss(normalize_db(pred), normalize_db(gt), cfg)
print(f"gradient loss {grad.total:.5f} "
      f"(per scale {dict((k, round(v, 5)) for k, v in grad.inplane_per_scale.items())}, "
      f"vertical {grad.vertical:.5f})")

cdf = vertical_grad_error_cdf(pred.values, gt.values)
print(f"vertical gradient error: p50 {cdf.percentile(50):.3f} dB, "
      f"p90 {cdf.percentile(90):.3f} dB")

# histogram statistics across two value distributions
bins = np.linspace(0, 1, 65)
h_gt, _ = np.histogram(normalize_db(gt).values, bins=bins)
h_pred, _ = np.histogram(normalize_db(pred).values, bins=bins)
stats = hist_stats(h_pred, h_gt)
print(f"norm entropy {stats.norm_entropy_a:.3f}/{stats.norm_entropy_b:.3f}, "
      f"gini {stats.gini_a:.3f}/{stats.gini_b:.3f}, "
      f"jsd {stats.d_js:.4f}, rho {stats.rho:.3f}")
