#include "proseg/model_core.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace proseg {

namespace {

bool is_spd(const MatrixXd& m, std::string* why) {
  if (m.rows() != m.cols()) {
    if (why) *why = "not square";
    return false;
  }
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    if (why) *why = "not symmetric";
    return false;
  }
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    if (why) *why = "Cholesky failed";
    return false;
  }
  return true;
}

bool all_finite(const MatrixXd& m) { return m.allFinite(); }

}  // namespace

NIWParams NIWParams::isotropic(int dim, double mu, double kappa, double sigma_scale,
                               double nu) {
  NIWParams p;
  p.mu0 = VectorXd::Constant(dim, mu);
  p.kappa0 = kappa;
  p.sigma0 = MatrixXd::Identity(dim, dim) * sigma_scale;
  p.nu0 = nu;
  return p;
}

void Hyperparameters::check() const {
  auto require = [](bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
  };
  require(gamma_lm > 0 && alpha_lm > 0 && gamma_wm > 0 && alpha_wm > 0,
          "concentration parameters must be positive");
  require(duration_shape > 0 && duration_rate > 0,
          "duration Gamma parameters must be positive");
  require(max_letters > 0 && max_words > 0, "truncation levels must be positive");
  require(max_word_duration > 0, "max_word_duration must be positive");
  require(max_word_length > 0, "max_word_length must be positive");
  require(max_word_length <= max_word_duration,
          "max_word_length must not exceed max_word_duration");
  auto check_niw = [&](const NIWParams& p, const char* name) {
    if (p.dim() == 0) return;  // prosody priors may be absent
    std::string why;
    if (p.kappa0 <= 0) throw std::invalid_argument(std::string(name) + ": kappa0 <= 0");
    if (p.nu0 <= p.dim() - 1)
      throw std::invalid_argument(std::string(name) + ": nu0 <= dim - 1");
    if (!is_spd(p.sigma0, &why))
      throw std::invalid_argument(std::string(name) + ": sigma0 " + why);
  };
  check_niw(emission_niw, "emission_niw");
  check_niw(prosody_niw_boundary, "prosody_niw_boundary");
  check_niw(prosody_niw_interior, "prosody_niw_interior");
}

void ObservationSequence::check() const {
  if (spectral.rows() < 1) throw std::invalid_argument("sequence has no frames");
  if (prosody.cols() > 0 && prosody.rows() != spectral.rows())
    throw std::invalid_argument("spectral/prosody frame counts differ");
  if (!all_finite(spectral) || (prosody.size() > 0 && !all_finite(prosody)))
    throw std::invalid_argument("sequence contains NaN/Inf");
}

int Segmentation::frames() const {
  return std::accumulate(word_durations.begin(), word_durations.end(), 0);
}

std::vector<uint8_t> derive_boundary_flags(const std::vector<int>& word_durations,
                                           int total_frames) {
  long sum = 0;
  for (int d : word_durations) {
    if (d <= 0) throw std::invalid_argument("durations must be positive");
    sum += d;
  }
  if (sum != total_frames)
    throw std::invalid_argument("durations do not sum to the frame count");
  std::vector<uint8_t> flags(total_frames, 0);
  long cum = 0;
  for (int d : word_durations) {
    cum += d;
    flags[cum - 1] = 1;
  }
  return flags;
}

bool ValidationReport::ok() const {
  for (const auto& item : items)
    if (!item.ok) return false;
  return true;
}

const ValidationReport::Item* ValidationReport::find(const std::string& check) const {
  for (const auto& item : items)
    if (item.check == check) return &item;
  return nullptr;
}

ValidationReport validate_state(const ModelState& state, const Hyperparameters& hp) {
  ValidationReport report;
  auto add = [&](const std::string& check, bool ok, const std::string& detail = "") {
    report.items.push_back({check, ok, detail});
  };

  auto check_stochastic = [&](const MatrixXd& m, const std::string& name) {
    bool ok = true;
    std::ostringstream detail;
    for (int i = 0; i < m.rows(); ++i) {
      double s = m.row(i).sum();
      if (std::abs(s - 1.0) > 1e-9 || m.row(i).minCoeff() < 0) {
        ok = false;
        detail << name << " row " << i << " sums to " << s << "; ";
      }
    }
    add(name + "_row_stochastic", ok, detail.str());
  };
  check_stochastic(state.pi_lm, "pi_lm");
  check_stochastic(state.pi_wm, "pi_wm");

  auto check_simplex = [&](const VectorXd& v, const std::string& name) {
    bool ok = std::abs(v.sum() - 1.0) <= 1e-9 && v.minCoeff() >= 0;
    add(name + "_simplex", ok);
  };
  check_simplex(state.beta_lm, "beta_lm");
  check_simplex(state.beta_wm, "beta_wm");

  add("pi_lm_shape", state.pi_lm.rows() == hp.max_words &&
                         state.pi_lm.cols() == hp.max_words &&
                         state.beta_lm.size() == hp.max_words);
  add("pi_wm_shape", state.pi_wm.rows() == hp.max_letters &&
                         state.pi_wm.cols() == hp.max_letters &&
                         state.beta_wm.size() == hp.max_letters);

  {
    bool ok = state.duration_rates.size() == hp.max_letters;
    for (int j = 0; j < state.duration_rates.size(); ++j)
      if (!(state.duration_rates[j] > 0)) ok = false;
    add("duration_rates_positive", ok);
  }

  {
    bool ok = static_cast<int>(state.emission_params.size()) == hp.max_letters;
    std::string why;
    for (const auto& g : state.emission_params)
      if (!is_spd(g.cov, &why)) ok = false;
    add("emission_cov_spd", ok, why);
  }

  if (state.has_prosody()) {
    std::string why;
    bool ok = is_spd(state.prosody_interior.cov, &why) &&
              is_spd(state.prosody_boundary.cov, &why) &&
              state.prosody_interior.dim() == state.prosody_boundary.dim();
    add("prosody_cov_spd", ok, why);
  }

  {
    bool ok = static_cast<int>(state.words.size()) == hp.max_words;
    std::ostringstream detail;
    for (size_t i = 0; i < state.words.size(); ++i) {
      const auto& w = state.words[i];
      if (w.empty()) {
        ok = false;
        detail << "word " << i << " empty; ";
      }
      if (static_cast<int>(w.size()) > hp.max_word_length) {
        ok = false;
        detail << "word " << i << " too long; ";
      }
      for (int l : w)
        if (l < 0 || l >= hp.max_letters) {
          ok = false;
          detail << "word " << i << " letter out of range; ";
          break;
        }
    }
    add("words_valid", ok, detail.str());
  }

  return report;
}

uint64_t words_fingerprint(const std::vector<std::vector<int>>& words) {
  uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  mix(words.size());
  for (const auto& w : words) {
    mix(0xfeedULL);
    mix(w.size());
    for (int l : w) mix(static_cast<uint64_t>(l) + 1);
  }
  return h;
}

}  // namespace proseg
