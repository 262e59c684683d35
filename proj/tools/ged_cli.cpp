// Experiment driver for the spectral energy distance toolkit.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiments.hpp"
#include "ged/optim.hpp"
#include "ged/wav_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;

void add_common_train_flags(CLI::App* cmd, ged::experiments::TrainCommonOptions& opt, bool& no_repulsive) {
  cmd->add_option("--seed", opt.seed, "Master RNG seed")->required();
  cmd->add_option("--steps", opt.steps, "Training steps");
  cmd->add_option("--batch", opt.batch, "Minibatch size");
  cmd->add_option("--lr", opt.lr, "Base learning rate");
  cmd->add_option("--warmup", opt.warmup_steps, "Linear warmup steps");
  cmd->add_option("--latent", opt.latent_dim, "Latent dimension (0 = command default)");
  cmd->add_option("--truncate", opt.eval_truncation,
                  "Truncate latent draws at this magnitude when sampling after training");
  cmd->add_flag("--no-repulsive", no_repulsive, "Drop the repulsive term from the loss");
  cmd->add_flag("--ema", opt.use_ema_for_eval, "Sample with EMA parameters after training");
  cmd->add_option("--out", opt.out_dir, "Output directory")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral generalized energy distance: training and evaluation experiments"};
  app.require_subcommand(1);

  // distance
  std::string file_a, file_b;
  std::vector<std::size_t> windows = {64, 128, 256, 512, 1024, 2048};
  std::size_t oversample = 8;
  double log_eps = 1e-5;
  bool use_mel = false;
  auto* cmd_distance = app.add_subcommand("distance", "Multi-scale distance between two WAV files");
  cmd_distance->add_option("file_a", file_a)->required();
  cmd_distance->add_option("file_b", file_b)->required();
  cmd_distance->add_option("--windows", windows, "Window lengths");
  cmd_distance->add_option("--oversample", oversample, "Fourier basis oversampling factor");
  cmd_distance->add_option("--log-eps", log_eps, "Additive floor inside the log term");
  cmd_distance->add_flag("--mel", use_mel, "Project spectrograms onto the mel scale");

  // train-gmm / train-highdim
  ged::experiments::TrainCommonOptions gmm_opt;
  bool gmm_no_rep = false;
  auto* cmd_gmm = app.add_subcommand("train-gmm", "Train an MLP sampler on a 2-D 3-mode mixture");
  add_common_train_flags(cmd_gmm, gmm_opt, gmm_no_rep);

  ged::experiments::TrainCommonOptions hd_opt;
  bool hd_no_rep = false;
  auto* cmd_hd = app.add_subcommand("train-highdim", "Train an MLP sampler on a 100-D Gaussian");
  add_common_train_flags(cmd_hd, hd_opt, hd_no_rep);

  // train-audio
  ged::experiments::AudioOptions audio_opt;
  bool audio_no_rep = false;
  auto* cmd_audio =
      app.add_subcommand("train-audio", "Train the inverse-STFT generator on harmonic tones");
  add_common_train_flags(cmd_audio, audio_opt.common, audio_no_rep);
  cmd_audio->add_option("--chunk", audio_opt.chunk, "Samples per feature chunk (C)");
  cmd_audio->add_option("--blocks", audio_opt.n_blocks, "Residual blocks");
  cmd_audio->add_option("--chunks", audio_opt.n_chunks, "Chunks per training example");
  cmd_audio->add_option("--chunk-latent", audio_opt.latent_dim, "Latent dims per chunk");
  cmd_audio->add_option("--windows", audio_opt.window_lens, "Distance window lengths");
  cmd_audio->add_option("--oversample", audio_opt.oversample, "Distance oversampling factor");
  cmd_audio->add_flag("--mel", audio_opt.use_mel, "Use mel-projected spectrograms in the loss");
  cmd_audio->add_option("--held-out", audio_opt.held_out, "Held-out pitch grid size");

  // ablate
  ged::experiments::AblateOptions ablate_opt;
  auto* cmd_ablate = app.add_subcommand("ablate", "Window-size and oversampling ablation grid");
  cmd_ablate->add_option("--seed", ablate_opt.seed, "Master RNG seed")->required();
  cmd_ablate->add_option("--steps", ablate_opt.steps, "Training steps per grid cell");
  cmd_ablate->add_option("--batch", ablate_opt.batch, "Minibatch size per grid cell");
  cmd_ablate->add_option("--chunks", ablate_opt.n_chunks, "Chunks per example (covers 2048)");
  cmd_ablate->add_option("--out", ablate_opt.out_dir, "Output directory")->required();

  // gradcheck
  auto* cmd_gradcheck =
      app.add_subcommand("gradcheck", "Finite-difference checks of every graph primitive");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (cmd_distance->parsed()) {
      ged::DistanceConfig cfg;
      cfg.window_lens = windows;
      cfg.oversample = oversample;
      cfg.log_eps = log_eps;
      cfg.use_mel = use_mel;
      return ged::experiments::run_distance_command(file_a, file_b, cfg, std::cout);
    }
    if (cmd_gmm->parsed()) {
      gmm_opt.repulsive = !gmm_no_rep;
      std::string report = ged::experiments::run_train_gmm(gmm_opt);
      std::printf("report: %s\n", report.c_str());
      return kExitOk;
    }
    if (cmd_hd->parsed()) {
      hd_opt.repulsive = !hd_no_rep;
      std::string report = ged::experiments::run_train_highdim(hd_opt);
      std::printf("report: %s\n", report.c_str());
      return kExitOk;
    }
    if (cmd_audio->parsed()) {
      audio_opt.common.repulsive = !audio_no_rep;
      ged::experiments::AudioReport rep = ged::experiments::run_train_audio(audio_opt);
      std::printf("pitch_match_rate: %g\ndist_ratio: %g\nreport: %s\n", rep.pitch_match_rate,
                  rep.dist_ratio, rep.report_path.c_str());
      return kExitOk;
    }
    if (cmd_ablate->parsed()) {
      std::string report = ged::experiments::run_ablate(ablate_opt);
      std::printf("report: %s\n", report.c_str());
      return kExitOk;
    }
    if (cmd_gradcheck->parsed()) {
      int failures = ged::experiments::run_gradcheck(std::cout);
      return failures == 0 ? kExitOk : 1;
    }
  } catch (const ged::TrainingDiverged& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDiverged;
  } catch (const ged::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
