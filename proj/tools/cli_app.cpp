#include "cli_app.hpp"

#include "sparseseg/sparseseg.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

namespace sparseseg::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SegmentFlags {
  std::string input;
  int block_size = 64;
  int bases = 10;
  double q = 0.01;
  double eps1 = 10.0;
  double eps2 = 10.0;
  double eps3 = 3.0;
  std::optional<double> lambda;
  double lambda_factor = 0.02;
  double rho = 1.0;
  int iters = 100;
  int threads = 0;

  SegmenterConfig config() const {
    SegmenterConfig c;
    c.n = block_size;
    c.k = bases;
    c.q = q;
    c.eps1 = eps1;
    c.eps2 = eps2;
    c.eps3 = eps3;
    c.lambda_rule = lambda ? LambdaRule::absolute(*lambda) : LambdaRule::relative(lambda_factor);
    c.rho = rho;
    c.iterations = iters;
    c.threads = threads;
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

void add_model_flags(CLI::App* cmd, SegmentFlags& f) {
  cmd->add_option("--input,-i", f.input, "Input image (PGM P2/P5 or 8-bit PNG)")->required();
  cmd->add_option("--block-size", f.block_size, "Block side N in pixels")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--bases", f.bases, "Number K of zig-zag DCT bases")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--q", f.q, "Coefficient penalty weight q (basis is scaled by 1/q)")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--eps1", f.eps1, "Per-pixel background threshold")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd->add_option("--eps2", f.eps2, "Flat-block neighbour colour tolerance")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd->add_option("--eps3", f.eps3, "Least-squares max-error threshold")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  auto* absolute = cmd->add_option("--lambda", f.lambda, "Absolute L1 weight for every block")
                       ->check(CLI::NonNegativeNumber);
  cmd->add_option("--lambda-factor", f.lambda_factor,
                  "Relative L1 weight: lambda = factor * max pixel of the block")
      ->capture_default_str()->check(CLI::NonNegativeNumber)->excludes(absolute);
  cmd->add_option("--rho", f.rho, "ADMM penalty parameter")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--iters", f.iters, "ADMM iterations per block")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
}

int run_segment(const SegmentFlags& flags, const std::string& output, std::ostream& out) {
  const SegmenterConfig config = flags.config();
  const GrayImage image = load_image(flags.input);
  const ImageSegmentation result = segment(image, config);
  save_mask(output, result.mask);
  out << "flat: " << result.counts.flat << ", ls: " << result.counts.least_squares
      << ", sparse: " << result.counts.sparse << "\n";
  return kExitOk;
}

int run_decompose(const SegmentFlags& flags, const std::string& smooth_out,
                  const std::string& sparse_out, std::ostream& out) {
  const SegmenterConfig config = flags.config();
  const GrayImage image = load_image(flags.input);
  const ImageSegmentation result = segment(image, config, /*keep_layers=*/true);
  save_pgm(smooth_out, result.smooth_layer);
  save_pgm(sparse_out, result.sparse_layer);
  out << "flat: " << result.counts.flat << ", ls: " << result.counts.least_squares
      << ", sparse: " << result.counts.sparse << "\n";
  return kExitOk;
}

std::set<std::string> list_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw NotFoundError("not a directory: " + dir.string());
  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) names.insert(entry.path().filename().string());
  }
  return names;
}

int run_eval(const std::string& pred_dir, const std::string& truth_dir,
             const std::string& json_out, std::ostream& out, std::ostream& err) {
  const std::set<std::string> pred = list_files(pred_dir);
  const std::set<std::string> truth = list_files(truth_dir);

  std::vector<std::string> unmatched;
  std::set_symmetric_difference(pred.begin(), pred.end(), truth.begin(), truth.end(),
                                std::back_inserter(unmatched));
  if (!unmatched.empty()) {
    err << "error: files without a counterpart:";
    for (const auto& name : unmatched) err << " " << name;
    err << "\n";
    return kExitRuntime;
  }
  if (pred.empty()) {
    err << "error: no images to evaluate\n";
    return kExitRuntime;
  }

  std::vector<ImagePair> pairs;
  for (const auto& name : pred) {
    pairs.push_back({name, fs::path(pred_dir) / name, fs::path(truth_dir) / name});
  }
  const DatasetReport report = evaluate_dataset(pairs);
  out << format_csv(report);
  if (!json_out.empty()) {
    std::ofstream js(json_out, std::ios::trunc);
    js << format_json(report);
    if (!js) throw WriteError("cannot write " + json_out);
  }
  return kExitOk;
}

int run_basis_dump(int n, int k, double q, const std::string& output, std::ostream& out) {
  if (static_cast<long long>(k) > static_cast<long long>(n) * n) {
    throw UsageError("--bases must not exceed block_size^2");
  }
  const BasisMatrix basis(n, k);
  const std::string text = q == 1.0 ? format_basis(basis.columns())
                                    : format_basis(scale_basis(basis, q).columns());
  if (output.empty()) {
    out << text;
  } else {
    std::ofstream f(output, std::ios::trunc | std::ios::binary);
    f << text;
    if (!f) throw WriteError("cannot write " + output);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse-smooth background/foreground segmentation for screen content",
               "sparseseg"};
  app.require_subcommand(1);

  SegmentFlags seg_flags;
  std::string mask_out;
  auto* seg = app.add_subcommand("segment",
                                 "Write a foreground mask (P5 PGM, foreground = 255, "
                                 "background = 0)");
  add_model_flags(seg, seg_flags);
  seg->add_option("--output,-o", mask_out, "Output mask path")->required();

  SegmentFlags dec_flags;
  std::string smooth_out;
  std::string sparse_out;
  auto* dec = app.add_subcommand("decompose",
                                 "Write the smooth layer and the absolute sparse layer");
  add_model_flags(dec, dec_flags);
  dec->add_option("--smooth-out", smooth_out, "Smooth layer output (P5 PGM)")->required();
  dec->add_option("--sparse-out", sparse_out, "Sparse layer output (P5 PGM)")->required();

  std::string pred_dir;
  std::string truth_dir;
  std::string json_out;
  auto* ev = app.add_subcommand("eval", "Precision/recall of predicted masks against ground truth");
  ev->add_option("--pred-dir", pred_dir, "Directory of predicted masks")->required();
  ev->add_option("--truth-dir", truth_dir, "Directory of ground-truth masks (same file names)")
      ->required();
  ev->add_option("--json-out", json_out, "Also write the report as JSON");

  int dump_n = 64;
  int dump_k = 10;
  double dump_q = 1.0;
  std::string dump_out;
  auto* dump = app.add_subcommand("basis-dump", "Print the DCT basis matrix, one row per pixel");
  dump->add_option("--block-size", dump_n)->capture_default_str()->check(CLI::PositiveNumber);
  dump->add_option("--bases", dump_k)->capture_default_str()->check(CLI::PositiveNumber);
  dump->add_option("--q", dump_q, "Print the basis scaled by 1/q")
      ->capture_default_str()->check(CLI::PositiveNumber);
  dump->add_option("--output,-o", dump_out, "Write to a file instead of standard output");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* active = &app;
    for (auto* sub : {seg, dec, ev, dump}) {
      if (sub->parsed()) active = sub;
    }
    err << active->help();
    return kExitUsage;
  }

  try {
    if (seg->parsed()) return run_segment(seg_flags, mask_out, out);
    if (dec->parsed()) return run_decompose(dec_flags, smooth_out, sparse_out, out);
    if (ev->parsed()) return run_eval(pred_dir, truth_dir, json_out, out, err);
    if (dump->parsed()) return run_basis_dump(dump_n, dump_k, dump_q, dump_out, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace sparseseg::cli
