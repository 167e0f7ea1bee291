"""End-to-end smoke test of the python bindings.

Covers the numpy boundary for every exposed surface: simulation, analysis,
degradation, the model round trip, feature-space tools, metrics, and wav IO.
Runs under ctest with PYTHONPATH pointing at the built extension.
"""

import math
import os
import sys
import tempfile

import numpy as np

import reverbkit as rk

FAILURES = []


def check(name, condition):
    tag = "ok" if condition else "FAIL"
    print(f"[{tag}] {name}")
    if not condition:
        FAILURES.append(name)


def main():
    fs = 24000.0

    # Simulation and analysis round trip.
    dims = [5.0, 4.0, 3.0]
    alpha, clamped = rk.absorption_for_rt60(dims, 0.4)
    check("absorption is a sane fraction", 0.01 <= alpha <= 0.99 and not clamped)
    src, mic = rk.random_placement(dims, seed=3)
    taps = rk.simulate_rir(dims, src, mic, absorption=alpha, sample_rate=fs)
    check("rir is a nonempty 1-D float array", taps.ndim == 1 and taps.size > 0)
    est = rk.rt60(taps, fs)
    check("rt60 lands near the design target", 0.1 < est < 1.0)
    check("drr is finite for a room response", math.isfinite(rk.drr(taps, fs)))
    edc = rk.energy_decay_curve(taps, fs)
    check("decay curve starts at 0 dB and never rises",
          abs(edc[0]) < 1e-9 and np.all(np.diff(edc) <= 1e-12))

    # Degradation.
    speech = rk.synth_utterance(0.6, fs, seed=11)
    noise = rk.synth_noise(0.6, fs, seed=12)
    wet = rk.degrade(speech, taps, fs, noise=noise, snr_db=10.0, chain="mulaw", seed=4)
    check("degraded signal has the convolved length", wet.size == speech.size + taps.size - 1)
    again = rk.degrade(speech, taps, fs, noise=noise, snr_db=10.0, chain="mulaw", seed=4)
    check("degradation is seed-deterministic", np.array_equal(wet, again))

    # Features and the model.
    s_mel = rk.log_mel(speech, fs, n_mels=32)
    x_full = rk.log_mel(wet, fs, n_mels=32)
    r_mel = rk.log_mel(rk.convolve(speech, taps), fs, n_mels=32)[: s_mel.shape[0]]
    check("log-mel has the requested bands", s_mel.shape[1] == 32)

    model = rk.Model.create(n_mels=32, hidden=8, feature_dim=4, seed=2)
    check("parameter count is positive", model.parameter_count > 0)
    losses = model.train([(s_mel, r_mel, x_full)], steps=30, batch=2, q=0.1, seed=1)
    check("training returns one loss per step", losses.size == 30)
    check("loss decreases over the short run", losses[-1] < losses[0])

    c = model.encode(x_full)
    check("feature has the configured width", c.shape == (4,))
    dec = model.decode(s_mel, c)
    check("decode preserves the clean shape", dec.shape == s_mel.shape)

    mid = rk.interpolate(list(c), list(np.zeros(4)), 0.5)
    check("midpoint interpolation averages", np.allclose(mid, np.asarray(c) * 0.5))

    with tempfile.TemporaryDirectory() as tmp:
        # Checkpoints store float32 payloads, so a round trip quantizes
        # parameters to float32 but is exact beyond that.
        model_path = os.path.join(tmp, "model.rvbm")
        model.save(model_path)
        reloaded = rk.Model.load(model_path)
        check("checkpoint round trip preserves decode to float32 precision",
              np.allclose(reloaded.decode(s_mel, c), dec, rtol=1e-5, atol=1e-5))

        feat_path = os.path.join(tmp, "feature.rvbf")
        rk.save_feature(feat_path, list(c))
        check("feature round trip equals the float32 quantization exactly",
              np.array_equal(rk.load_feature(feat_path),
                             np.asarray(c, dtype=np.float32).astype(np.float64)))

        wav_path = os.path.join(tmp, "sig.wav")
        rk.write_wav(wav_path, speech, fs)
        back, rate = rk.read_wav(wav_path)
        check("float32 wav round trip at the stored rate",
              rate == fs and np.allclose(back, speech, atol=1e-7))

        # PCA over a small batch of features.
        feats = np.stack([model.encode(rk.log_mel(rk.degrade(speech, taps, fs, seed=s), fs, 32))
                          for s in range(6)])
        pca = rk.Pca.fit(feats, k=2)
        check("pca keeps two components", pca.k == 2 and pca.dim == 4)
        z = pca.project(list(feats[0]))
        lifted = pca.lift(list(z))
        check("project/lift returns to feature space", lifted.shape == (4,))
        grid = pca.sample_grid(nx=2, ny=2)
        check("grid sampling yields 4 features", grid.shape == (4, 4))
        pca_path = os.path.join(tmp, "space.rvbp")
        pca.save(pca_path)
        check("pca round trip preserves projection to float32 precision",
              np.allclose(rk.Pca.load(pca_path).project(list(feats[0])), z,
                          rtol=1e-5, atol=1e-6))

    # Metrics.
    check("mcd self-distance is exactly zero", rk.mcd(speech, speech, fs) == 0.0)
    value, frames = rk.gpe(speech, speech, fs)
    check("gpe self-error is exactly zero", value == 0.0 and frames > 0)
    f0, voiced, hop = rk.pitch_track(speech, fs)
    check("pitch track aligns", f0.shape == voiced.shape and hop > 0)

    # Errors surface as ValueError.
    try:
        rk.simulate_rir([5.0, 4.0], src, mic)
        check("bad dims raise ValueError", False)
    except ValueError:
        check("bad dims raise ValueError", True)

    if FAILURES:
        print(f"{len(FAILURES)} smoke checks failed")
        return 1
    print("all smoke checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
