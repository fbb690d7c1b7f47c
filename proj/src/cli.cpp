#include "rdnet/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>

#include "rdnet/errors.hpp"
#include "rdnet/eval.hpp"

namespace rdnet::cli {

namespace {

template <class Fn>
int run_guarded(std::ostream& err, Fn&& fn) {
  try {
    fn();
    return kExitOk;
  } catch (const InvalidInputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

int parse_int(const std::string& s, const char* what) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidInputError(std::string("invalid ") + what + " '" + s + "'");
  return v;
}

// "4x4" or "2x1+1x3" -> grid list
std::vector<GridSpec> parse_grid_token(const std::string& token) {
  std::vector<GridSpec> grids;
  size_t pos = 0;
  while (pos <= token.size()) {
    const size_t plus = std::min(token.find('+', pos), token.size());
    const std::string part = token.substr(pos, plus - pos);
    const size_t x = part.find('x');
    if (x == std::string::npos || x == 0 || x + 1 >= part.size())
      throw InvalidInputError("invalid grid value '" + token + "' (expected e.g. 4x4 or 2x1+1x3)");
    grids.push_back({parse_int(part.substr(0, x), "grid rows"),
                     parse_int(part.substr(x + 1), "grid cols")});
    if (plus == token.size()) break;
    pos = plus + 1;
  }
  if (grids.empty()) throw InvalidInputError("empty grid value");
  return grids;
}

Traversal load_dir(const std::string& dir, const char* what) {
  if (dir.empty())
    throw InvalidInputError(std::string("config does not set dataset.") + what + "_dir");
  return load_traversal(dir);
}

Ensemble train_ensemble(const RunConfig& cfg, const Traversal& reference, std::ostream& out,
                        std::ostream& err, bool verbose) {
  Ensemble ensemble = Ensemble::build(cfg.to_ensemble_config(), int(reference.images.size()));
  out << "P=" << ensemble.regions() << " T=" << ensemble.size() << "\n";
  const auto stats = ensemble.train_all(reference.images);

  const auto regions = enumerate_regions(ensemble.config().plan);
  const int z = ensemble.group_size();
  for (int p = 0; p < ensemble.regions(); ++p) {
    float final_sum = 0.f, initial_sum = 0.f;
    for (int m = 0; m < z; ++m) {
      final_sum += stats[size_t(p) * z + m].final_loss;
      initial_sum += stats[size_t(p) * z + m].initial_loss;
    }
    out << "group " << p << " (grid " << grid_label(regions[size_t(p)].spec) << " cell "
        << regions[size_t(p)].row << "," << regions[size_t(p)].col
        << "): final_loss=" << final_sum / z;
    if (verbose) out << " initial_loss=" << initial_sum / z;
    out << "\n";
  }
  (void)err;
  return ensemble;
}

struct AblationRow {
  std::string value;
  double auc = 0.0;
  double ep = 0.0;
  double mean_ms = 0.0;
};

void write_ablation_csv(const std::string& results_dir, const std::vector<AblationRow>& rows) {
  std::filesystem::create_directories(results_dir);
  const std::string path = (std::filesystem::path(results_dir) / "ablation.csv").string();
  std::ofstream csv(path);
  if (!csv) throw InvalidInputError("cannot write '" + path + "'");
  csv << "value,auc,ep,mean_ms\n";
  for (const auto& r : rows)
    csv << r.value << "," << r.auc << "," << r.ep << "," << r.mean_ms << "\n";
}

// Timing subsample for ablation rows; keeps sweeps affordable.
std::vector<GrayImage> timing_sample(const std::vector<GrayImage>& queries, size_t cap = 100) {
  return {queries.begin(), queries.begin() + ptrdiff_t(std::min(queries.size(), cap))};
}

}  // namespace

int cmd_train(const RunConfig& cfg, const std::string& model_path, std::ostream& out,
              std::ostream& err, bool verbose) {
  return run_guarded(err, [&] {
    const Traversal reference = load_dir(cfg.dataset.reference_dir, "reference");
    const Ensemble ensemble = train_ensemble(cfg, reference, out, err, verbose);
    ensemble.save(model_path);
    out << "model written to " << model_path << "\n";
  });
}

int cmd_eval(const RunConfig& cfg, const std::string& model_path, const std::string& results_dir,
             std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    const Ensemble ensemble = Ensemble::load(model_path);
    const Traversal queries = load_dir(cfg.dataset.query_dir, "query");
    const GroundTruth gt =
        load_ground_truth(cfg.dataset, int(queries.images.size()), ensemble.n_places());

    const EvalBundle bundle = evaluate(ensemble, queries.images, gt);

    namespace fs = std::filesystem;
    fs::create_directories(results_dir);
    const fs::path dir(results_dir);
    write_matches_json((dir / "matches.json").string(), bundle.records);
    write_metrics_json((dir / "metrics.json").string(), bundle.metrics,
                       int(bundle.records.size()));
    write_pr_csv((dir / "pr_curve.csv").string(), bundle.metrics.pr);
    write_per_region_csv((dir / "per_region.csv").string(), ensemble.config().plan,
                         bundle.per_region);

    out << "queries=" << bundle.records.size() << " auc=" << bundle.metrics.auc
        << " ep=" << bundle.metrics.ep << " p_r0=" << bundle.metrics.p_r0
        << " r_p100=" << bundle.metrics.r_p100 << "\n";
    out << "results written to " << results_dir << "\n";
  });
}

int cmd_time(const RunConfig& cfg, const std::string& model_path, std::ostream& out,
             std::ostream& err) {
  return run_guarded(err, [&] {
    const Ensemble ensemble = Ensemble::load(model_path);
    const Traversal queries = load_dir(cfg.dataset.query_dir, "query");
    const TimingStats stats = time_inference(ensemble, queries.images);
    char line[160];
    std::snprintf(line, sizeof line,
                  "samples=%d mean_ms=%.3f median_ms=%.3f p99_ms=%.3f fps=%.2f\n", stats.samples,
                  stats.mean_ms, stats.median_ms, stats.p99_ms, stats.fps());
    out << line;
  });
}

int cmd_ablate(const RunConfig& cfg, const std::string& axis,
               const std::vector<std::string>& values, const std::string& results_dir,
               std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    if (axis != "grids" && axis != "k" && axis != "z")
      throw InvalidInputError("invalid ablation axis '" + axis + "' (grids, k or z)");
    if (values.empty()) throw InvalidInputError("no ablation values given");

    const Traversal reference = load_dir(cfg.dataset.reference_dir, "reference");
    const Traversal queries = load_dir(cfg.dataset.query_dir, "query");

    std::vector<AblationRow> rows;
    if (axis == "k") {
      // K only matters at voting time: one training pass serves all values.
      const Ensemble ensemble = train_ensemble(cfg, reference, out, err, false);
      const GroundTruth gt =
          load_ground_truth(cfg.dataset, int(queries.images.size()), ensemble.n_places());
      for (const auto& value : values) {
        const int k = parse_int(value, "K value");
        if (k < 1) throw InvalidInputError("K must be >= 1, got '" + value + "'");
        const auto records = run_queries(ensemble, queries.images, gt, k);
        const Metrics m = compute_metrics(records);
        const TimingStats ts = time_inference(ensemble, timing_sample(queries.images), k);
        rows.push_back({value, m.auc, m.ep, ts.mean_ms});
        out << "k=" << value << " auc=" << m.auc << " ep=" << m.ep << " mean_ms=" << ts.mean_ms
            << "\n";
      }
    } else {
      for (const auto& value : values) {
        RunConfig run = cfg;
        if (axis == "z") {
          run.z_per_region = parse_int(value, "Z value");
          if (run.z_per_region < 1) throw InvalidInputError("Z must be >= 1, got '" + value + "'");
        } else {
          run.grids = parse_grid_token(value);
        }
        run.validate();
        const Ensemble ensemble = train_ensemble(run, reference, out, err, false);
        const GroundTruth gt =
            load_ground_truth(run.dataset, int(queries.images.size()), ensemble.n_places());
        const auto records = run_queries(ensemble, queries.images, gt);
        const Metrics m = compute_metrics(records);
        const TimingStats ts = time_inference(ensemble, timing_sample(queries.images));
        rows.push_back({value, m.auc, m.ep, ts.mean_ms});
        out << axis << "=" << value << " auc=" << m.auc << " ep=" << m.ep
            << " mean_ms=" << ts.mean_ms << "\n";
      }
    }
    write_ablation_csv(results_dir, rows);
    out << "ablation written to " << results_dir << "/ablation.csv\n";
  });
}

int cmd_synth(const SynthSpec& spec, const std::string& out_dir, std::ostream& out,
              std::ostream& err) {
  return run_guarded(err, [&] {
    const SynthDataset ds = generate_synthetic(spec);
    write_dataset(ds, out_dir);
    out << "wrote " << ds.reference.images.size() << " reference and " << ds.query.images.size()
        << " query frames under " << out_dir << "\n";
  });
}

}  // namespace rdnet::cli
