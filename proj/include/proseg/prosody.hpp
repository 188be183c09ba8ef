#pragma once

#include <string>
#include <vector>

#include "proseg/model_core.hpp"

namespace proseg {

struct AudioBuffer {
  std::vector<double> samples;  // mono, [-1, 1]
  double sample_rate = 0.0;

  double duration_s() const { return samples.size() / sample_rate; }
  void check() const;
};

struct ProsodyConfig {
  double f0_frame_s = 0.01;
  double f0_min_hz = 40.0;
  double f0_max_hz = 300.0;
  double silence_threshold_db = -8.0;  // relative to the sequence's peak RMS
  double silence_min_s = 0.01;
  double mfcc_frame_s = 0.025;
  double mfcc_shift_s = 0.010;
  int mfcc_dim = 12;
  bool use_deltas = false;  // append first and second differentials (3x dim)

  void check() const;
};

// Fundamental frequency per f0_frame_s step, 0 on unvoiced frames.
// Normalized autocorrelation peak with parabolic refinement and octave-down
// correction; frames whose refined frequency leaves [f0_min, f0_max] are
// unvoiced.
std::vector<double> extract_f0(const AudioBuffer& audio, const ProsodyConfig& cfg);

// Central second difference x[t+1] - 2 x[t] + x[t-1]; boundary frames 0.
std::vector<double> second_difference(const std::vector<double>& values);

// Same, additionally zeroed wherever the triple touches an unvoiced frame.
std::vector<double> second_difference(const std::vector<double>& values,
                                      const std::vector<uint8_t>& voiced);

struct PauseInterval {
  double start_s = 0.0;
  double end_s = 0.0;
  double duration_s() const { return end_s - start_s; }
};

// Maximal intervals where the short-time RMS (25 ms window) sits below
// silence_threshold_db relative to the sequence peak for at least
// silence_min_s.
std::vector<PauseInterval> detect_pauses(const AudioBuffer& audio,
                                         const ProsodyConfig& cfg);

// MFCC matrix, one row per frame. 26-filter mel bank, 0.97 pre-emphasis,
// Hamming window, DCT-II coefficients 1..mfcc_dim (energy coefficient
// excluded); deltas appended when configured.
MatrixXd mfcc_features(const AudioBuffer& audio, const ProsodyConfig& cfg);

// Full pipeline: MFCC + (ddF0, pause-duration) prosody channels, with pause
// frames removed and each pause's duration written onto the frame preceding
// it. Throws when nothing remains (entirely silent audio).
ObservationSequence assemble_features(const AudioBuffer& audio, const ProsodyConfig& cfg,
                                      const std::string& id = "");

}  // namespace proseg
