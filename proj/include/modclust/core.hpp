#pragma once
// Shared domain types for the module-detection pipeline, validated on
// construction and immutable afterwards.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace modclust {

using GeneId = std::string;

// Exit-code category carried by every error: 2 input, 3 numeric, 4 degenerate.
enum class ErrorCategory : int { input = 2, numeric = 3, degenerate = 4 };

class Error : public std::runtime_error {
public:
  Error(ErrorCategory cat, const std::string& msg)
      : std::runtime_error(msg), cat_(cat) {}
  ErrorCategory category() const { return cat_; }
  int exit_code() const { return static_cast<int>(cat_); }

private:
  ErrorCategory cat_;
};

#define MODCLUST_ERROR(Name, Category)                          \
  class Name final : public Error {                             \
  public:                                                       \
    explicit Name(const std::string& msg)                       \
        : Error(ErrorCategory::Category, std::string(#Name ": ") + msg) {} \
  }

MODCLUST_ERROR(ValidationError, input);
MODCLUST_ERROR(InputFormatError, input);
MODCLUST_ERROR(LengthMismatch, input);
MODCLUST_ERROR(UnknownGene, input);
MODCLUST_ERROR(EmptyPriorCluster, input);
MODCLUST_ERROR(ConstantProfile, input);
MODCLUST_ERROR(AsymmetricMatrix, numeric);
MODCLUST_ERROR(OutOfRangeEntry, numeric);
MODCLUST_ERROR(BadDiagonal, numeric);
MODCLUST_ERROR(DegeneratePriorBlock, numeric);
MODCLUST_ERROR(SingularShift, numeric);
MODCLUST_ERROR(NonConvergentEigensolve, numeric);
MODCLUST_ERROR(SpectralRadiusTooLarge, numeric);
MODCLUST_ERROR(EmptyUniverse, degenerate);
MODCLUST_ERROR(DegenerateGold, degenerate);
MODCLUST_ERROR(TooFewPoints, degenerate);

#undef MODCLUST_ERROR

// True iff id is usable in tab-separated files: non-empty, no tab/newline.
bool valid_gene_id(const GeneId& id);

// Writes "[modclust] warning: ..." to stderr.
void warn(const std::string& msg);

enum class MetricTag { PCC, DCC, MI1, MI2, MI3 };

std::string to_string(MetricTag m);
std::optional<MetricTag> metric_from_string(const std::string& s);

struct MatrixMeta {
  MetricTag metric = MetricTag::PCC;
  bool supervised = false;
  bool deconvolved = false;
};

// Gene-major expression data: one row per gene, one column per sample.
class ExpressionMatrix {
public:
  ExpressionMatrix(std::vector<GeneId> genes, std::vector<std::string> samples,
                   Eigen::MatrixXd values);

  const std::vector<GeneId>& genes() const { return genes_; }
  const std::vector<std::string>& samples() const { return samples_; }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::Index n_genes() const { return values_.rows(); }
  Eigen::Index n_samples() const { return values_.cols(); }
  std::optional<Eigen::Index> index_of(const GeneId& g) const;

private:
  std::vector<GeneId> genes_;
  std::vector<std::string> samples_;
  Eigen::MatrixXd values_;
  std::unordered_map<GeneId, Eigen::Index> index_;
};

// Symmetric gene-gene similarity matrix with entries in [0,1] and unit
// diagonal.  The constructor symmetrizes asymmetry up to 1e-12 via (M+Mt)/2,
// clamps range overhang up to 1e-12, forces the diagonal to exactly 1, and
// rejects anything worse.
class CorrelationMatrix {
public:
  static constexpr double kTolerance = 1e-12;

  CorrelationMatrix(std::vector<GeneId> genes, Eigen::MatrixXd values,
                    MatrixMeta meta);

  const std::vector<GeneId>& genes() const { return genes_; }
  const Eigen::MatrixXd& values() const { return values_; }
  const MatrixMeta& meta() const { return meta_; }
  Eigen::Index size() const { return values_.rows(); }
  std::optional<Eigen::Index> index_of(const GeneId& g) const;

private:
  std::vector<GeneId> genes_;
  Eigen::MatrixXd values_;
  MatrixMeta meta_;
  std::unordered_map<GeneId, Eigen::Index> index_;
};

struct PriorCluster {
  std::string name;
  std::vector<GeneId> members;  // >= 2, unique within the cluster
};

// Named gene sets asserted by prior information; sets may overlap.
class PriorClusterSet {
public:
  PriorClusterSet() = default;
  explicit PriorClusterSet(std::vector<PriorCluster> clusters);

  const std::vector<PriorCluster>& clusters() const { return clusters_; }
  bool empty() const { return clusters_.empty(); }
  std::size_t size() const { return clusters_.size(); }

private:
  std::vector<PriorCluster> clusters_;
};

struct DendrogramMerge {
  int left = 0;   // node id: 0..n-1 leaves, n+k for the k-th merge
  int right = 0;
  double height = 0.0;  // dissimilarity in [0,1]
};

// Merge tree over dissimilarities 1 - similarity; heights non-decreasing.
class Dendrogram {
public:
  Dendrogram(std::vector<GeneId> leaves, std::vector<DendrogramMerge> merges);

  const std::vector<GeneId>& leaves() const { return leaves_; }
  const std::vector<DendrogramMerge>& merges() const { return merges_; }
  int n_leaves() const { return static_cast<int>(leaves_.size()); }

private:
  std::vector<GeneId> leaves_;
  std::vector<DendrogramMerge> merges_;
};

struct Module {
  std::string id;
  std::vector<GeneId> members;  // non-empty
};

// Flat module collection; disjointness enforced unless overlapping is set.
class ModuleSet {
public:
  ModuleSet(std::vector<Module> modules, bool overlapping);

  const std::vector<Module>& modules() const { return modules_; }
  bool overlapping() const { return overlapping_; }
  std::size_t size() const { return modules_.size(); }

  // Union of member sets, in first-appearance order.
  std::vector<GeneId> covered_genes() const;

private:
  std::vector<Module> modules_;
  bool overlapping_;
};

struct RocPoint {
  double eps = 0.0;  // cutting threshold; NaN on the synthetic endpoints
  double fpr = 0.0;
  double tpr = 0.0;
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  bool synthetic = false;
};

struct RocCurve {
  std::vector<RocPoint> points;  // ordered by (fpr, tpr)
};

}  // namespace modclust
