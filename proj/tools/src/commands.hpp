#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpl/pseudo_label.hpp"

namespace lpl::cli {

struct GlobalOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  std::string argv_joined;  // hashed into the manifest's config_hash
};

struct SynthOptions {
  std::string config_path;
  std::string preset = "default";  // default | source
};

struct PseudoOptions {
  std::string data;
  std::string split = "train";
  FilterParams filter;
  LabelParams label;
};

struct LabelsEvalOptions {
  std::string data;
  std::string split = "train";
  std::string labels;
  bool exclude_pseudo_ignore = false;
  LabelParams label;
};

struct LabelsCleanOptions {
  std::string data;
  std::string split = "train";
  std::string labels;
  std::string mode = "both";  // remove-fp | remove-fn | both | both-correct-reg
  LabelParams label;
};

struct HistOptions {
  std::string labels;         // labels file (pseudo centers)
  std::string data;           // dataset root (annotation centers)
  std::string split = "train";
  double bin_width = 1.0;
  double max_distance = 30.0;
};

struct TrainOptions {
  std::string data;
  std::string split = "train";
  std::string supervision = "pseudo";  // pseudo | gt
  std::string labels;
  std::string loss = "ce";  // ce | phuber
  bool mixup = false;
  double tau = 5.0;
  double alpha = 0.2;
  double mixup_weight = 0.7;
  int epochs = 5;
  int batch_size = 8;
  double lr = 1e-3;
  double lr_final = 1e-6;
  std::string clean;  // optional cleaning against annotations before training
  double flip_labels = 0.0;
  std::string init;   // optional starting model
  int window = 17;
  LabelParams label;
};

struct FinetuneOptions {
  std::string data;
  std::string labels;
  std::string model;
  std::string shuffle = "global";  // global | sequence
  int track_every = 10;
  int batch_size = 8;
  double tau = 5.0;
  double lr = 5e-5;
  LabelParams label;
};

struct EvalOptions {
  std::string data;
  std::string split = "test";
  std::string model;
};

void cmd_synth(const GlobalOptions& global, const SynthOptions& options);
void cmd_pseudo(const GlobalOptions& global, const PseudoOptions& options);
void cmd_labels_eval(const GlobalOptions& global, const LabelsEvalOptions& options);
void cmd_labels_clean(const GlobalOptions& global, const LabelsCleanOptions& options);
void cmd_hist(const GlobalOptions& global, const HistOptions& options);
void cmd_train(const GlobalOptions& global, const TrainOptions& options);
void cmd_finetune(const GlobalOptions& global, const FinetuneOptions& options);
void cmd_eval(const GlobalOptions& global, const EvalOptions& options);

}  // namespace lpl::cli
