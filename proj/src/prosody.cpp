#include "proseg/prosody.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace proseg {

void AudioBuffer::check() const {
  if (samples.empty()) throw std::invalid_argument("audio buffer is empty");
  if (!(sample_rate > 0)) throw std::invalid_argument("sample rate must be positive");
}

void ProsodyConfig::check() const {
  auto require = [](bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
  };
  require(f0_frame_s > 0 && mfcc_frame_s > 0 && mfcc_shift_s > 0 && silence_min_s > 0,
          "frame parameters must be positive");
  require(f0_min_hz > 0 && f0_min_hz < f0_max_hz, "need 0 < f0_min < f0_max");
  require(silence_threshold_db < 0, "silence threshold is a negative dB value");
  require(mfcc_dim >= 1, "mfcc_dim must be at least 1");
}

namespace {

double frame_rms(const std::vector<double>& x, long lo, long hi) {
  lo = std::max(lo, 0L);
  hi = std::min(hi, static_cast<long>(x.size()));
  if (hi <= lo) return 0.0;
  double s = 0.0;
  for (long i = lo; i < hi; ++i) s += x[i] * x[i];
  return std::sqrt(s / (hi - lo));
}

// normalized autocorrelation of x[start .. start+len) at the given lag
double nac(const std::vector<double>& x, long start, long len, int lag, double mean) {
  long n = len - lag;
  if (n < 8) return 0.0;
  double num = 0.0, e0 = 0.0, e1 = 0.0;
  const double* p = x.data() + start;
  for (long i = 0; i < n; ++i) {
    double a = p[i] - mean;
    double b = p[i + lag] - mean;
    num += a * b;
    e0 += a * a;
    e1 += b * b;
  }
  double denom = std::sqrt(e0 * e1);
  return denom > 0 ? num / denom : 0.0;
}

// parabolic peak refinement around integer lag; returns (lag, value)
std::pair<double, double> refine_peak(double ym1, double y0, double yp1, int lag) {
  double denom = ym1 - 2.0 * y0 + yp1;
  if (std::abs(denom) < 1e-12) return {static_cast<double>(lag), y0};
  double delta = 0.5 * (ym1 - yp1) / denom;
  delta = std::clamp(delta, -0.5, 0.5);
  return {lag + delta, y0 - 0.25 * (ym1 - yp1) * delta};
}

constexpr double kVoicingThreshold = 0.5;
constexpr double kOctaveRatio = 0.85;  // accept a halved lag this close to the peak

void fft_inplace(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double angle = -2.0 * M_PI / static_cast<double>(len);
    std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (size_t j = 0; j < len / 2; ++j) {
        auto u = a[i + j];
        auto v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

constexpr int kMelFilters = 26;
constexpr double kPreEmphasis = 0.97;
constexpr double kLogFloor = 1e-30;

MatrixXd delta_features(const MatrixXd& base) {
  // standard regression deltas with window 2
  const int frames = static_cast<int>(base.rows());
  MatrixXd out(frames, base.cols());
  const double norm = 2.0 * (1.0 + 4.0);
  for (int t = 0; t < frames; ++t) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(base.cols());
    for (int n = 1; n <= 2; ++n) {
      int hi = std::min(t + n, frames - 1);
      int lo = std::max(t - n, 0);
      acc += n * (base.row(hi) - base.row(lo));
    }
    out.row(t) = acc / norm;
  }
  return out;
}

}  // namespace

std::vector<double> extract_f0(const AudioBuffer& audio, const ProsodyConfig& cfg) {
  audio.check();
  cfg.check();
  const double sr = audio.sample_rate;
  const long hop = std::lround(cfg.f0_frame_s * sr);
  const int lag_min = std::max(2, static_cast<int>(std::floor(sr / cfg.f0_max_hz)));
  const int lag_max = static_cast<int>(std::ceil(sr / cfg.f0_min_hz));
  const long win = 2L * lag_max;  // two periods of the lowest pitch
  const long n = static_cast<long>(audio.samples.size());
  if (n < hop) throw std::invalid_argument("audio shorter than one analysis frame");

  const long n_frames = n / hop;
  std::vector<double> f0(n_frames, 0.0);
  std::vector<double> corr(lag_max + 2, 0.0);

  for (long f = 0; f < n_frames; ++f) {
    long start = f * hop;
    long len = std::min(win, n - start);
    if (len < 2L * lag_min + 8) continue;
    if (frame_rms(audio.samples, start, start + len) < 1e-6) continue;

    double mean = 0.0;
    for (long i = start; i < start + len; ++i) mean += audio.samples[i];
    mean /= len;

    int hi = static_cast<int>(std::min<long>(lag_max, len - 8));
    double best_val = -2.0;
    for (int lag = lag_min - 1; lag <= hi + 1; ++lag) {
      corr[lag] = nac(audio.samples, start, len, lag, mean);
      if (lag >= lag_min && lag <= hi && corr[lag] > best_val) best_val = corr[lag];
    }
    if (best_val < kVoicingThreshold) continue;

    // the fundamental is the smallest strong local peak; the global argmax
    // can land on a higher multiple of the true period
    int best = -1;
    for (int lag = lag_min; lag <= hi; ++lag) {
      if (corr[lag] < 0.9 * best_val) continue;
      if (corr[lag] >= corr[lag - 1] && corr[lag] >= corr[lag + 1]) {
        best = lag;
        break;
      }
    }
    if (best < 0) continue;
    auto [lag, value] = refine_peak(corr[best - 1], corr[best], corr[best + 1], best);

    // octave-down correction: a strong peak at half the lag means the true
    // period is shorter (possibly above f0_max, in which case: unvoiced)
    for (;;) {
      int half = static_cast<int>(std::lround(lag / 2.0));
      if (half < 2) break;
      double h0 = nac(audio.samples, start, len, half, mean);
      double hm = nac(audio.samples, start, len, half - 1, mean);
      double hp = nac(audio.samples, start, len, half + 1, mean);
      double peak = std::max({h0, hm, hp});
      if (peak < kOctaveRatio * value) break;
      auto [rl, rv] = refine_peak(hm, h0, hp, half);
      lag = rl;
      value = std::max(value, rv);
    }

    double hz = sr / lag;
    if (hz >= cfg.f0_min_hz && hz <= cfg.f0_max_hz) f0[f] = hz;
  }
  return f0;
}

std::vector<double> second_difference(const std::vector<double>& values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.size() < 3) return out;
  for (size_t t = 1; t + 1 < values.size(); ++t)
    out[t] = values[t + 1] - 2.0 * values[t] + values[t - 1];
  return out;
}

std::vector<double> second_difference(const std::vector<double>& values,
                                      const std::vector<uint8_t>& voiced) {
  if (voiced.size() != values.size())
    throw std::invalid_argument("second_difference: mask length mismatch");
  std::vector<double> out = second_difference(values);
  for (size_t t = 0; t < out.size(); ++t) {
    bool interior = t > 0 && t + 1 < out.size();
    if (!interior || !voiced[t] || !voiced[t - 1] || !voiced[t + 1]) out[t] = 0.0;
  }
  return out;
}

std::vector<PauseInterval> detect_pauses(const AudioBuffer& audio,
                                         const ProsodyConfig& cfg) {
  audio.check();
  cfg.check();
  const double sr = audio.sample_rate;
  const long hop = std::lround(cfg.mfcc_shift_s * sr);
  const long win = std::lround(0.025 * sr);
  const long n = static_cast<long>(audio.samples.size());
  const long n_frames = n / hop;
  if (n_frames == 0) return {};

  std::vector<double> rms(n_frames);
  double peak = 0.0;
  for (long f = 0; f < n_frames; ++f) {
    long center = f * hop + hop / 2;
    rms[f] = frame_rms(audio.samples, center - win / 2, center + win / 2);
    peak = std::max(peak, rms[f]);
  }
  if (peak == 0.0) return {};

  const double threshold = peak * std::pow(10.0, cfg.silence_threshold_db / 20.0);
  const double energy_ratio = std::pow(10.0, cfg.silence_threshold_db / 10.0);
  // a frame only reads silent once most of its window is silent; compensate
  // that onset/offset bias when reporting interval edges
  const double edge_bias =
      std::max(0.0, (0.5 - energy_ratio)) * (static_cast<double>(win) / sr);
  const double half_hop = 0.5 * static_cast<double>(hop) / sr;

  std::vector<PauseInterval> pauses;
  long run_start = -1;
  auto flush = [&](long run_end_exclusive) {
    if (run_start < 0) return;
    double c_first = (run_start * hop + hop / 2) / sr;
    double c_last = ((run_end_exclusive - 1) * hop + hop / 2) / sr;
    PauseInterval p;
    p.start_s = std::max(0.0, c_first - edge_bias - half_hop);
    p.end_s = std::min(static_cast<double>(n) / sr, c_last + edge_bias + half_hop);
    if (p.duration_s() >= cfg.silence_min_s) pauses.push_back(p);
    run_start = -1;
  };
  for (long f = 0; f < n_frames; ++f) {
    if (rms[f] < threshold) {
      if (run_start < 0) run_start = f;
    } else {
      flush(f);
    }
  }
  flush(n_frames);
  return pauses;
}

MatrixXd mfcc_features(const AudioBuffer& audio, const ProsodyConfig& cfg) {
  audio.check();
  cfg.check();
  const double sr = audio.sample_rate;
  const long win = std::lround(cfg.mfcc_frame_s * sr);
  const long hop = std::lround(cfg.mfcc_shift_s * sr);
  const long n = static_cast<long>(audio.samples.size());
  if (n < win) throw std::invalid_argument("audio shorter than one analysis frame");
  const long n_frames = 1 + (n - win) / hop;

  size_t fft_size = 1;
  while (fft_size < static_cast<size_t>(win)) fft_size <<= 1;
  const size_t n_bins = fft_size / 2 + 1;

  // triangular mel bank over the full band
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(sr / 2.0);
  std::vector<double> edges(kMelFilters + 2);
  for (int m = 0; m < kMelFilters + 2; ++m) {
    double hz = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (kMelFilters + 1));
    edges[m] = hz * static_cast<double>(fft_size) / sr;  // fractional bin
  }

  std::vector<double> window(win);
  for (long i = 0; i < win; ++i)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (win - 1));

  MatrixXd base(n_frames, cfg.mfcc_dim);
  std::vector<std::complex<double>> spectrum(fft_size);
  std::vector<double> power(n_bins), filter_energy(kMelFilters);

  for (long f = 0; f < n_frames; ++f) {
    const long start = f * hop;
    for (long i = 0; i < win; ++i) {
      double prev = (start + i) > 0 ? audio.samples[start + i - 1] : 0.0;
      spectrum[i] = (audio.samples[start + i] - kPreEmphasis * prev) * window[i];
    }
    std::fill(spectrum.begin() + win, spectrum.end(), std::complex<double>(0.0));
    fft_inplace(spectrum);
    for (size_t b = 0; b < n_bins; ++b) power[b] = std::norm(spectrum[b]);

    for (int m = 0; m < kMelFilters; ++m) {
      double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
      double acc = 0.0;
      for (long b = std::lround(std::ceil(lo)); b <= std::lround(std::floor(hi)); ++b) {
        if (b < 0 || b >= static_cast<long>(n_bins)) continue;
        double w = b <= mid ? (b - lo) / std::max(mid - lo, 1e-12)
                            : (hi - b) / std::max(hi - mid, 1e-12);
        if (w > 0) acc += w * power[b];
      }
      filter_energy[m] = std::log(std::max(acc, kLogFloor));
    }
    for (int c = 1; c <= cfg.mfcc_dim; ++c) {
      double acc = 0.0;
      for (int m = 0; m < kMelFilters; ++m)
        acc += filter_energy[m] * std::cos(M_PI * c * (m + 0.5) / kMelFilters);
      base(f, c - 1) = acc;
    }
  }

  if (!cfg.use_deltas) return base;
  MatrixXd d1 = delta_features(base);
  MatrixXd d2 = delta_features(d1);
  MatrixXd out(n_frames, 3 * cfg.mfcc_dim);
  out << base, d1, d2;
  return out;
}

ObservationSequence assemble_features(const AudioBuffer& audio, const ProsodyConfig& cfg,
                                      const std::string& id) {
  audio.check();
  double peak = 0.0;
  for (double s : audio.samples) peak = std::max(peak, std::abs(s));
  if (peak < 1e-6) throw std::runtime_error("audio is entirely silent");
  const MatrixXd spectral = mfcc_features(audio, cfg);
  const long n_frames = spectral.rows();
  const double sr = audio.sample_rate;

  // ddF0 on the original timeline, resampled onto the MFCC frame grid
  std::vector<double> f0 = extract_f0(audio, cfg);
  std::vector<uint8_t> voiced(f0.size());
  for (size_t i = 0; i < f0.size(); ++i) voiced[i] = f0[i] > 0 ? 1 : 0;
  std::vector<double> ddf0 = second_difference(f0, voiced);

  std::vector<double> ddf0_grid(n_frames, 0.0);
  for (long f = 0; f < n_frames; ++f) {
    long j = std::lround(f * cfg.mfcc_shift_s / cfg.f0_frame_s);
    if (j >= 0 && j < static_cast<long>(ddf0.size())) ddf0_grid[f] = ddf0[j];
  }

  const auto pauses = detect_pauses(audio, cfg);
  std::vector<uint8_t> removed(n_frames, 0);
  std::vector<double> pause_at(n_frames, 0.0);  // attached to the preceding kept frame
  for (const auto& p : pauses) {
    long last_kept_before = -1;
    for (long f = 0; f < n_frames; ++f) {
      double center = (f * cfg.mfcc_shift_s) + 0.5 * cfg.mfcc_frame_s;
      if (center >= p.start_s && center < p.end_s)
        removed[f] = 1;
      else if (center < p.start_s && !removed[f])
        last_kept_before = f;
    }
    if (last_kept_before >= 0) pause_at[last_kept_before] += p.duration_s();
  }

  long kept = 0;
  for (long f = 0; f < n_frames; ++f)
    if (!removed[f]) ++kept;
  if (kept == 0)
    throw std::runtime_error("no frames left after pause removal (silent audio?)");

  ObservationSequence seq;
  seq.id = id;
  seq.spectral.resize(kept, spectral.cols());
  seq.prosody.resize(kept, 2);
  long out = 0;
  for (long f = 0; f < n_frames; ++f) {
    if (removed[f]) continue;
    seq.spectral.row(out) = spectral.row(f);
    seq.prosody(out, 0) = ddf0_grid[f];
    seq.prosody(out, 1) = pause_at[f];
    ++out;
  }
  (void)sr;
  return seq;
}

}  // namespace proseg
