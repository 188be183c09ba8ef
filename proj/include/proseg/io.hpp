#pragma once

#include <string>
#include <utility>
#include <vector>

#include "proseg/gibbs.hpp"
#include "proseg/prosody.hpp"

namespace proseg {

// Usage / IO problems the CLI maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

AudioBuffer load_wav(const std::string& path);
void write_wav(const std::string& path, const AudioBuffer& audio);  // 16-bit PCM

struct FeatureData {
  ObservationSequence sequence;
  double frame_shift_s = 0.0;
};

// Binary feature file: header + row-major little-endian float32 matrices
// (spectral then prosody). Layout documented in docs/FORMATS.md.
void write_feature_file(const std::string& path, const ObservationSequence& seq,
                        double frame_shift_s);
FeatureData read_feature_file(const std::string& path);

// Companion labels: two int32 columns per frame (letter, word).
void write_label_file(const std::string& path, const std::vector<int>& letters,
                      const std::vector<int>& words);
std::pair<std::vector<int>, std::vector<int>> read_label_file(const std::string& path);

// Model checkpoint, all parameters as little-endian float64.
void save_model(const std::string& path, const ModelState& state);
ModelState load_model(const std::string& path);

// Full sampler state for exact resume (model + segmentations + trace).
void save_train_state(const std::string& path, const TrainState& ts);
TrainState load_train_state(const std::string& path);

}  // namespace proseg
