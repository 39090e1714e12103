// curriculum/dataset.h

// Copyright 2026  The ctc-curriculum Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CURRICULUM_DATASET_H_
#define CURRICULUM_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "curriculum/ctc.h"

namespace curriculum {

/// One word inside a line: labels [label_begin, label_end) rendered on
/// frames [frame_begin, frame_end).
struct WordSpan {
  int label_begin = 0;
  int label_end = 0;
  int frame_begin = 0;
  int frame_end = 0;

  bool operator==(const WordSpan&) const = default;
};

struct Sample {
  std::int64_t id = 0;
  RowMatrix frames;  // T x input_dim
  LabelSequence target;
  std::vector<WordSpan> words;

  std::size_t target_len() const { return target.size(); }
};

bool operator==(const Sample& a, const Sample& b);

/// Immutable list of samples sharing one label set and frame width.
/// The space label is `alphabet_size - 1`; the CTC blank is not a label.
struct Corpus {
  int alphabet_size = 0;
  int input_dim = 0;
  std::vector<Sample> samples;

  int space_label() const { return alphabet_size - 1; }
  std::uint64_t total_target_chars() const;

  bool operator==(const Corpus&) const = default;
};

struct SplitCorpus {
  Corpus train;
  Corpus valid;
};

/// Synthetic stand-in for a line database. Lines are words of 1..8
/// characters separated by the space label; each character is a run of
/// noisy copies of a per-label template vector.
struct CorpusSpec {
  int alphabet_size = 20;  // includes the space label
  int input_dim = 16;
  int n_train = 10000;
  int n_valid = 1000;
  double short_line_prob = 0.15;
  int short_min = 1;
  int short_max = 5;
  int long_min = 10;
  int long_max = 60;
  int word_min = 1;
  int word_max = 8;
  int frames_min = 3;  // frames per character
  int frames_max = 8;
  double noise_sigma = 0.3;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on an inconsistent spec.
  void validate() const;
  /// Expected characters per line under the length mixture.
  double mean_line_length() const;
};

/// Deterministic in `spec`. Frame values are rounded to single precision so
/// corpus files can store them compactly and still round-trip exactly.
SplitCorpus generate_corpus(const CorpusSpec& spec);

/// One sample per annotated word, cut from the frames and labels of its
/// line. Throws std::invalid_argument if a nonempty line has no word spans.
Corpus split_into_words(const Corpus& lines);

/// Throws std::invalid_argument unless the word spans are ordered,
/// nonoverlapping, inside the line, and separated only by space labels.
void validate_words(const Sample& sample, int space_label);

/// Raised by load_corpus; `line()` is the 1-based line of the bad record.
class CorpusFormatError : public std::runtime_error {
 public:
  CorpusFormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// JSON-lines corpus file: a header record, then one record per sample.
void save_corpus(const std::string& path, const Corpus& corpus);
Corpus load_corpus(const std::string& path);

}  // namespace curriculum

#endif  // CURRICULUM_DATASET_H_
