#include "modclust/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include "modclust/evalkit.hpp"
#include "modclust/hac.hpp"
#include "modclust/io.hpp"
#include "modclust/metagene.hpp"

namespace modclust::pipeline {

namespace fs = std::filesystem;

namespace {

// Re-thrown stage failures keep the original category (and exit code) while
// naming the stage that failed.
class StageError final : public Error {
public:
  StageError(ErrorCategory cat, const std::string& msg) : Error(cat, msg) {}
};

template <typename F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw StageError(e.category(),
                     std::string("stage '") + name + "': " + e.what());
  }
}

class OutputTracker {
public:
  explicit OutputTracker(fs::path outdir) : outdir_(std::move(outdir)) {}

  fs::path file(const std::string& rel) {
    rel_.push_back(rel);
    return outdir_ / rel;
  }

  void dir(const fs::path& p) { dirs_.push_back(p); }

  const std::vector<std::string>& relpaths() const { return rel_; }

  void cleanup() {
    std::error_code ec;
    for (const auto& rel : rel_) fs::remove(outdir_ / rel, ec);
    for (auto it = dirs_.rbegin(); it != dirs_.rend(); ++it)
      fs::remove(*it, ec);  // only removes empty directories
  }

private:
  fs::path outdir_;
  std::vector<std::string> rel_;
  std::vector<fs::path> dirs_;
};

void write_metagene_map(const fs::path& path,
                        const metagene::MetageneMap& map) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw InputFormatError("cannot open '" + path.string() + "' for writing");
  for (const auto& entry : map.entries)
    for (const auto& member : entry.members)
      out << entry.id << '\t' << member << '\n';
  out.flush();
  if (!out) throw InputFormatError("write to '" + path.string() + "' failed");
}

void write_table(const fs::path& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw InputFormatError("cannot open '" + path.string() + "' for writing");
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "\t" : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "\t" : "") << row[i];
    out << '\n';
  }
  out.flush();
  if (!out) throw InputFormatError("write to '" + path.string() + "' failed");
}

struct NamedMatrix {
  std::string subdir;  // "" for the single global/plain result
  CorrelationMatrix matrix;
};

}  // namespace

RunReport run_pipeline(const RunConfig& cfg) {
  if (cfg.outdir.empty()) throw ValidationError("output directory not set");
  if (!cfg.priors_path.empty() && !cfg.prior_edges_path.empty())
    throw ValidationError("give prior clusters either as modules or as edges");
  const fs::path outdir(cfg.outdir);
  fs::create_directories(outdir);
  OutputTracker tracker(outdir);

  try {
    ExpressionMatrix expr = stage("read-expression", [&] {
      return io::read_expression(cfg.expr_path, cfg.samples_as_rows);
    });

    std::vector<std::pair<std::string, std::string>> manifest;
    manifest.emplace_back("tool", "modclust");
    manifest.emplace_back("version", kVersion);
    manifest.emplace_back("metric", to_string(cfg.metric.metric));
    manifest.emplace_back(
        "discretization",
        cfg.metric.discretization == corrmat::Discretization::EqualWidth
            ? "width"
            : "freq");
    manifest.emplace_back("bins",
                          cfg.metric.bins == corrmat::MetricConfig::kAutoBins
                              ? "auto"
                              : std::to_string(cfg.metric.bins));
    manifest.emplace_back("metagene", cfg.metagene ? "1" : "0");
    if (cfg.metagene)
      manifest.emplace_back("metagene_tau", io::format_real(cfg.metagene_tau));

    if (cfg.metagene) {
      auto [merged, map] = stage("metagene", [&] {
        return metagene::merge_metagenes(expr, cfg.metagene_tau);
      });
      stage("write-metagene-map", [&] {
        write_metagene_map(tracker.file("metagene_map.tsv"), map);
        return 0;
      });
      expr = std::move(merged);
    }

    CorrelationMatrix observed = stage("correlate", [&] {
      return corrmat::build_correlation_matrix(expr, cfg.metric);
    });

    const bool supervised =
        !cfg.priors_path.empty() || !cfg.prior_edges_path.empty();
    manifest.emplace_back(
        "supervision",
        !supervised ? "none"
        : cfg.supervision.mode == priors::Mode::Global ? "global"
                                                       : "local");
    if (supervised) {
      double rho_hat = cfg.supervision.rho_hat;
      if (cfg.supervision.policy == priors::RhoPolicy::Certain) rho_hat = 0.0;
      if (cfg.supervision.policy == priors::RhoPolicy::Off) rho_hat = 1.0;
      manifest.emplace_back("rho_hat", io::format_real(rho_hat));
    }

    std::vector<NamedMatrix> matrices;
    if (supervised) {
      PriorClusterSet prior_set = stage("read-priors", [&] {
        if (!cfg.priors_path.empty()) return io::read_priors(cfg.priors_path);
        auto edges = io::read_edges(cfg.prior_edges_path);
        std::vector<GeneId> endpoint_genes;
        std::unordered_set<GeneId> seen;
        for (const auto& [a, b] : edges) {
          if (seen.insert(a).second) endpoint_genes.push_back(a);
          if (seen.insert(b).second) endpoint_genes.push_back(b);
        }
        return priors::communities_from_edges(endpoint_genes, edges);
      });
      if (cfg.supervision.mode == priors::Mode::Global) {
        matrices.push_back(NamedMatrix{
            "", stage("supervise", [&] {
              return priors::incorporate_global(observed, prior_set,
                                                cfg.supervision);
            })});
      } else {
        auto per_cluster = stage("supervise", [&] {
          return priors::incorporate_local(observed, prior_set,
                                           cfg.supervision);
        });
        std::unordered_set<std::string> used;
        for (auto& [name, matrix] : per_cluster) {
          std::string sub = io::sanitize_component(name);
          while (!used.insert(sub).second) sub += "_";
          matrices.push_back(NamedMatrix{sub, std::move(matrix)});
        }
      }
    } else {
      matrices.push_back(NamedMatrix{"", std::move(observed)});
    }

    manifest.emplace_back("deconvolve", cfg.deconvolve ? "1" : "0");
    if (cfg.deconvolve) {
      manifest.emplace_back("delta", io::format_real(cfg.deconv.delta));
      for (auto& nm : matrices)
        nm.matrix = stage("deconvolve", [&] {
          return deconv::deconvolve(nm.matrix, cfg.deconv);
        });
    }

    manifest.emplace_back("step", io::format_real(cfg.step));
    if (cfg.epsilon)
      manifest.emplace_back("epsilon", io::format_real(*cfg.epsilon));

    std::optional<ModuleSet> gold;
    if (!cfg.gold_path.empty())
      gold = stage("read-gold", [&] { return io::read_modules(cfg.gold_path); });

    for (const auto& nm : matrices) {
      const std::string prefix = nm.subdir.empty() ? "" : nm.subdir + "/";
      if (!nm.subdir.empty()) {
        fs::create_directories(outdir / nm.subdir);
        tracker.dir(outdir / nm.subdir);
      }

      const Dendrogram tree =
          stage("cluster", [&] { return hac::single_linkage(nm.matrix); });
      stage("write-dendrogram", [&] {
        io::write_dendrogram(tracker.file(prefix + "dendrogram.txt").string(),
                             tree);
        return 0;
      });

      const auto sweep =
          stage("sweep", [&] { return hac::threshold_sweep(tree, cfg.step); });

      if (gold) {
        stage("evaluate", [&] {
          const RocCurve curve = evalkit::roc(sweep, *gold);
          io::write_roc(tracker.file(prefix + "roc.tsv").string(), curve);
          const double area = evalkit::auc(curve);
          const evalkit::BestF best = evalkit::best_f(sweep, *gold);
          const std::size_t knee_index = evalkit::knee(curve);
          const RocPoint& knee_point = curve.points[knee_index];

          io::write_modules(tracker.file(prefix + "modules.tsv").string(),
                            hac::cut(tree, best.eps));
          const ModuleSet knee_cut = hac::cut(tree, knee_point.eps);
          io::write_modules(tracker.file(prefix + "modules_knee.tsv").string(),
                            knee_cut);

          std::size_t largest = 0;
          for (std::size_t i = 1; i < knee_cut.modules().size(); ++i)
            if (knee_cut.modules()[i].members.size() >
                knee_cut.modules()[largest].members.size())
              largest = i;
          io::write_modules(
              tracker.file(prefix + "largest_module.tsv").string(),
              ModuleSet({knee_cut.modules()[largest]}, false));

          write_table(
              tracker.file(prefix + "metrics.tsv"),
              {"auc", "best_eps", "best_precision", "best_recall", "best_f",
               "knee_eps", "knee_fpr", "knee_tpr", "sweep_points",
               "gold_positive_pairs", "gold_negative_pairs"},
              {{io::format_real_12(area), io::format_real_12(best.eps),
                io::format_real_12(best.prf.precision),
                io::format_real_12(best.prf.recall),
                io::format_real_12(best.prf.f),
                io::format_real_12(knee_point.eps),
                io::format_real_12(knee_point.fpr),
                io::format_real_12(knee_point.tpr),
                std::to_string(sweep.size()),
                std::to_string(knee_point.tp + knee_point.fn),
                std::to_string(knee_point.fp + knee_point.tn)}});
          return 0;
        });
      } else if (cfg.epsilon) {
        stage("cut", [&] {
          io::write_modules(tracker.file(prefix + "modules.tsv").string(),
                            hac::cut(tree, *cfg.epsilon));
          return 0;
        });
      } else {
        stage("sweep-summary", [&] {
          std::vector<std::vector<std::string>> rows;
          for (const auto& point : sweep) {
            std::size_t largest = 0;
            for (const auto& mod : point.modules.modules())
              largest = std::max(largest, mod.members.size());
            rows.push_back({io::format_real_12(point.eps),
                            std::to_string(point.modules.size()),
                            std::to_string(largest)});
          }
          write_table(tracker.file(prefix + "sweep_summary.tsv"),
                      {"eps", "n_modules", "largest_module"}, rows);
          return 0;
        });
      }
    }

    const auto add_input = [&](const std::string& key, const std::string& path) {
      if (path.empty()) return;
      manifest.emplace_back("input." + key + ".name",
                            fs::path(path).filename().string());
      manifest.emplace_back("input." + key + ".digest", io::file_digest(path));
    };
    add_input("expression", cfg.expr_path);
    add_input("priors", cfg.priors_path);
    add_input("prior_edges", cfg.prior_edges_path);
    add_input("gold", cfg.gold_path);

    std::vector<std::string> outputs = tracker.relpaths();
    std::sort(outputs.begin(), outputs.end());
    for (const auto& rel : outputs) manifest.emplace_back("output", rel);

    {
      std::vector<std::vector<std::string>> rows;
      for (const auto& [key, value] : manifest) rows.push_back({key, value});
      write_table(tracker.file("manifest.tsv"), {"key", "value"}, rows);
    }

    RunReport report;
    report.outputs = tracker.relpaths();
    return report;
  } catch (...) {
    tracker.cleanup();
    throw;
  }
}

}  // namespace modclust::pipeline
