#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "lpl/errors.hpp"
#include "lpl/version.hpp"

namespace {

using namespace lpl;
using namespace lpl::cli;

void add_label_param_options(CLI::App* cmd, LabelParams& params) {
  cmd->add_option("--r-pos", params.r_pos, "classification-positive radius [m]");
  cmd->add_option("--r-reg", params.r_reg, "regression radius [m]");
  cmd->add_option("--min-support", params.min_support, "minimum positives per center");
  cmd->add_option("--r-kernel", params.r_kernel, "mean-shift kernel radius [m]");
  cmd->add_option("--widen", params.widen, "box widening for the negative mask");
  cmd->add_option("--min-frustum", params.min_frustum_points,
                  "minimum frustum points for localization");
}

}  // namespace

int main(int argc, char** argv) {
  GlobalOptions global;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) global.argv_joined += '\x1f';
    global.argv_joined += argv[i];
  }

  CLI::App app{"2D-LiDAR person detection toolkit: synthetic scenes, image-box pseudo-labels, "
               "detector training and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  app.add_option("--seed", global.seed, "master random seed")->capture_default_str();
  app.add_option("--threads", global.threads, "worker threads for per-frame stages")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out", global.out, "output path (directory, file or prefix per command)");

  SynthOptions synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->fallthrough();
  synth_cmd->add_option("--config", synth.config_path, "TOML config with overrides");
  synth_cmd->add_option("--preset", synth.preset, "base config: default|source")
      ->capture_default_str();
  synth_cmd->callback([&] { cmd_synth(global, synth); });

  PseudoOptions pseudo;
  CLI::App* pseudo_cmd = app.add_subcommand("pseudo", "generate pseudo-labels from detections");
  pseudo_cmd->fallthrough();
  pseudo_cmd->add_option("--data", pseudo.data, "dataset directory")->required();
  pseudo_cmd->add_option("--split", pseudo.split, "train|test|all")->capture_default_str();
  pseudo_cmd->add_option("--t-score", pseudo.filter.t_score, "minimum box score")
      ->capture_default_str();
  pseudo_cmd->add_option("--t-aspect", pseudo.filter.t_aspect, "maximum width/height ratio")
      ->capture_default_str();
  pseudo_cmd->add_option("--t-overlap", pseudo.filter.t_overlap, "maximum overlap ratio")
      ->capture_default_str();
  add_label_param_options(pseudo_cmd, pseudo.label);
  pseudo_cmd->callback([&] { cmd_pseudo(global, pseudo); });

  LabelsEvalOptions labels_eval;
  CLI::App* le_cmd = app.add_subcommand("labels-eval", "TPR/TNR of labels against annotations");
  le_cmd->fallthrough();
  le_cmd->add_option("--data", labels_eval.data, "dataset directory")->required();
  le_cmd->add_option("--split", labels_eval.split, "train|test|all")->capture_default_str();
  le_cmd->add_option("--labels", labels_eval.labels, "labels JSON file")->required();
  le_cmd->add_flag("--exclude-pseudo-ignore", labels_eval.exclude_pseudo_ignore,
                   "drop pseudo-ignore points from the counts");
  add_label_param_options(le_cmd, labels_eval.label);
  le_cmd->callback([&] { cmd_labels_eval(global, labels_eval); });

  LabelsCleanOptions labels_clean;
  CLI::App* lc_cmd = app.add_subcommand("labels-clean", "replace wrong labels with ground truth");
  lc_cmd->fallthrough();
  lc_cmd->add_option("--data", labels_clean.data, "dataset directory")->required();
  lc_cmd->add_option("--split", labels_clean.split, "train|test|all")->capture_default_str();
  lc_cmd->add_option("--labels", labels_clean.labels, "labels JSON file")->required();
  lc_cmd->add_option("--mode", labels_clean.mode,
                     "remove-fp|remove-fn|both|both-correct-reg")
      ->capture_default_str();
  add_label_param_options(lc_cmd, labels_clean.label);
  lc_cmd->callback([&] { cmd_labels_clean(global, labels_clean); });

  HistOptions hist;
  CLI::App* hist_cmd = app.add_subcommand("hist", "distance histogram (CSV + SVG)");
  hist_cmd->fallthrough();
  hist_cmd->add_option("--labels", hist.labels, "labels JSON file (pseudo centers)");
  hist_cmd->add_option("--data", hist.data, "dataset directory (annotation centers)");
  hist_cmd->add_option("--split", hist.split, "train|test|all")->capture_default_str();
  hist_cmd->add_option("--bin-width", hist.bin_width, "bin width [m]")->capture_default_str();
  hist_cmd->add_option("--max-distance", hist.max_distance, "overflow threshold [m]")
      ->capture_default_str();
  hist_cmd->callback([&] { cmd_hist(global, hist); });

  TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand("train", "train a detector");
  train_cmd->fallthrough();
  train_cmd->add_option("--data", train.data, "dataset directory")->required();
  train_cmd->add_option("--split", train.split, "train|test|all")->capture_default_str();
  train_cmd->add_option("--supervision", train.supervision, "pseudo|gt")->capture_default_str();
  train_cmd->add_option("--labels", train.labels, "labels JSON (pseudo supervision)");
  train_cmd->add_option("--loss", train.loss, "ce|phuber")->capture_default_str();
  train_cmd->add_flag("--mixup", train.mixup, "enable mixup regularization");
  train_cmd->add_option("--tau", train.tau, "partial-Huber saturation")->capture_default_str();
  train_cmd->add_option("--alpha", train.alpha, "mixup Beta(alpha, alpha)")->capture_default_str();
  train_cmd->add_option("--mixup-weight", train.mixup_weight, "mixup loss weight w")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs, "training epochs")->capture_default_str();
  train_cmd->add_option("--batch-size", train.batch_size, "scans per batch")
      ->capture_default_str();
  train_cmd->add_option("--lr", train.lr, "initial learning rate")->capture_default_str();
  train_cmd->add_option("--lr-final", train.lr_final, "final learning rate")
      ->capture_default_str();
  train_cmd->add_option("--clean", train.clean,
                        "clean pseudo labels first: remove-fp|remove-fn|both|both-correct-reg");
  train_cmd->add_option("--flip-labels", train.flip_labels,
                        "inject synthetic label flips (fraction of labeled points)");
  train_cmd->add_option("--init", train.init, "starting model JSON (fine-tune from)");
  train_cmd->add_option("--window", train.window, "feature window size (odd)")
      ->capture_default_str();
  add_label_param_options(train_cmd, train.label);
  train_cmd->callback([&] { cmd_train(global, train); });

  FinetuneOptions finetune;
  CLI::App* ft_cmd = app.add_subcommand("finetune", "one-epoch online adaptation with AP tracking");
  ft_cmd->fallthrough();
  ft_cmd->add_option("--data", finetune.data, "dataset directory")->required();
  ft_cmd->add_option("--labels", finetune.labels, "labels JSON for the train split")->required();
  ft_cmd->add_option("--model", finetune.model, "pre-trained model JSON")->required();
  ft_cmd->add_option("--shuffle", finetune.shuffle, "global|sequence")->capture_default_str();
  ft_cmd->add_option("--track-every", finetune.track_every, "AP checkpoint interval [updates]")
      ->capture_default_str();
  ft_cmd->add_option("--batch-size", finetune.batch_size, "scans per batch")
      ->capture_default_str();
  ft_cmd->add_option("--tau", finetune.tau, "partial-Huber saturation")->capture_default_str();
  ft_cmd->add_option("--lr", finetune.lr, "fine-tuning learning rate")->capture_default_str();
  add_label_param_options(ft_cmd, finetune.label);
  ft_cmd->callback([&] { cmd_finetune(global, finetune); });

  EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "detector AP on a dataset split");
  eval_cmd->fallthrough();
  eval_cmd->add_option("--data", eval.data, "dataset directory")->required();
  eval_cmd->add_option("--split", eval.split, "train|test|all")->capture_default_str();
  eval_cmd->add_option("--model", eval.model, "model JSON")->required();
  eval_cmd->callback([&] { cmd_eval(global, eval); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
