#include "modclust/evalkit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace modclust::evalkit {

namespace {

// Bit per unordered gene pair over universe indices, row-major upper
// triangle.
class PairBits {
public:
  explicit PairBits(std::uint64_t g)
      : g_(g), bits_((g * (g - 1) / 2 + 63) / 64, 0) {}

  void set(std::uint64_t i, std::uint64_t j) {
    const std::uint64_t p = index(i, j);
    bits_[p >> 6] |= std::uint64_t{1} << (p & 63);
  }

  std::uint64_t count() const {
    std::uint64_t c = 0;
    for (std::uint64_t w : bits_) c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
  }

  std::uint64_t count_and(const PairBits& other) const {
    std::uint64_t c = 0;
    for (std::size_t k = 0; k < bits_.size(); ++k)
      c += static_cast<std::uint64_t>(std::popcount(bits_[k] & other.bits_[k]));
    return c;
  }

private:
  std::uint64_t index(std::uint64_t i, std::uint64_t j) const {
    if (i > j) std::swap(i, j);
    return i * g_ - i * (i + 1) / 2 + (j - i - 1);
  }

  std::uint64_t g_;
  std::vector<std::uint64_t> bits_;
};

std::uint64_t choose2(std::uint64_t k) { return k * (k - 1) / 2; }

PairBits mark_pairs(const ModuleSet& ms,
                    const std::unordered_map<GeneId, std::uint64_t>& universe,
                    std::uint64_t g) {
  PairBits bits(g);
  std::vector<std::uint64_t> idx;
  for (const auto& mod : ms.modules()) {
    idx.clear();
    for (const auto& gene : mod.members) {
      auto it = universe.find(gene);
      if (it != universe.end()) idx.push_back(it->second);
    }
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = a + 1; b < idx.size(); ++b)
        bits.set(idx[a], idx[b]);
  }
  return bits;
}

}  // namespace

ConfusionCounts pair_confusion(const ModuleSet& pred, const ModuleSet& gold) {
  std::unordered_set<GeneId> gold_cov;
  for (const auto& g : gold.covered_genes()) gold_cov.insert(g);
  std::unordered_map<GeneId, std::uint64_t> universe;
  for (const auto& g : pred.covered_genes())
    if (gold_cov.count(g)) universe.emplace(g, universe.size());
  const std::uint64_t g = universe.size();
  if (g < 2)
    throw EmptyUniverse("prediction and gold standard share " +
                        std::to_string(g) + " gene(s); need at least 2");
  const std::uint64_t total = choose2(g);

  ConfusionCounts c;
  if (!pred.overlapping() && !gold.overlapping()) {
    // Disjoint fast path: count co-assignment pairs per (pred, gold) label.
    std::unordered_map<GeneId, std::uint32_t> pred_of, gold_of;
    for (std::uint32_t k = 0; k < pred.modules().size(); ++k)
      for (const auto& gene : pred.modules()[k].members)
        if (universe.count(gene)) pred_of.emplace(gene, k);
    for (std::uint32_t k = 0; k < gold.modules().size(); ++k)
      for (const auto& gene : gold.modules()[k].members)
        if (universe.count(gene)) gold_of.emplace(gene, k);

    std::unordered_map<std::uint64_t, std::uint64_t> joint;
    std::unordered_map<std::uint32_t, std::uint64_t> by_pred, by_gold;
    for (const auto& [gene, _] : universe) {
      const std::uint32_t p = pred_of.at(gene);
      const std::uint32_t q = gold_of.at(gene);
      ++joint[(static_cast<std::uint64_t>(p) << 32) | q];
      ++by_pred[p];
      ++by_gold[q];
    }
    std::uint64_t tp = 0, pred_pos = 0, gold_pos = 0;
    for (const auto& [_, cnt] : joint) tp += choose2(cnt);
    for (const auto& [_, cnt] : by_pred) pred_pos += choose2(cnt);
    for (const auto& [_, cnt] : by_gold) gold_pos += choose2(cnt);
    c.tp = tp;
    c.fp = pred_pos - tp;
    c.fn = gold_pos - tp;
    c.tn = total - tp - c.fp - c.fn;
    return c;
  }

  const PairBits pred_bits = mark_pairs(pred, universe, g);
  const PairBits gold_bits = mark_pairs(gold, universe, g);
  c.tp = pred_bits.count_and(gold_bits);
  c.fp = pred_bits.count() - c.tp;
  c.fn = gold_bits.count() - c.tp;
  c.tn = total - c.tp - c.fp - c.fn;
  return c;
}

Prf precision_recall_f(const ConfusionCounts& c) {
  Prf out;
  if (c.tp + c.fp > 0)
    out.precision =
        static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0)
    out.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (out.precision + out.recall > 0.0)
    out.f = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

RocCurve roc(const std::vector<hac::SweepPoint>& sweep, const ModuleSet& gold) {
  if (sweep.empty()) throw ValidationError("cannot build a ROC from an empty sweep");
  RocCurve curve;
  std::uint64_t pos = 0, neg = 0;
  for (const auto& point : sweep) {
    const ConfusionCounts c = pair_confusion(point.modules, gold);
    if (c.gold_positive() == 0 || c.gold_negative() == 0)
      throw DegenerateGold("gold standard has " +
                           std::to_string(c.gold_positive()) +
                           " positive and " + std::to_string(c.gold_negative()) +
                           " negative pairs over the evaluation universe");
    RocPoint p;
    p.eps = point.eps;
    p.tp = c.tp;
    p.fp = c.fp;
    p.tn = c.tn;
    p.fn = c.fn;
    p.fpr = static_cast<double>(c.fp) / static_cast<double>(c.gold_negative());
    p.tpr = static_cast<double>(c.tp) / static_cast<double>(c.gold_positive());
    curve.points.push_back(p);
    pos = c.gold_positive();
    neg = c.gold_negative();
  }

  RocPoint origin;
  origin.eps = std::numeric_limits<double>::quiet_NaN();
  origin.synthetic = true;
  origin.fpr = 0.0;
  origin.tpr = 0.0;
  origin.tn = neg;
  origin.fn = pos;
  RocPoint full = origin;
  full.fpr = 1.0;
  full.tpr = 1.0;
  full.tp = pos;
  full.fp = neg;
  full.tn = 0;
  full.fn = 0;
  curve.points.insert(curve.points.begin(), origin);
  curve.points.push_back(full);

  std::stable_sort(curve.points.begin(), curve.points.end(),
                   [](const RocPoint& a, const RocPoint& b) {
                     if (a.fpr != b.fpr) return a.fpr < b.fpr;
                     return a.tpr < b.tpr;
                   });
  return curve;
}

double auc(const RocCurve& curve) {
  if (curve.points.size() < 2)
    throw TooFewPoints("AUC needs at least 2 ROC points");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return area;
}

BestF best_f(const std::vector<hac::SweepPoint>& sweep, const ModuleSet& gold) {
  if (sweep.empty()) throw ValidationError("cannot score an empty sweep");
  BestF best;
  best.eps = -1.0;
  double best_score = -1.0;
  for (const auto& point : sweep) {
    const Prf prf = precision_recall_f(pair_confusion(point.modules, gold));
    if (prf.f > best_score || (prf.f == best_score && point.eps > best.eps)) {
      best_score = prf.f;
      best.eps = point.eps;
      best.prf = prf;
    }
  }
  return best;
}

std::size_t knee(const RocCurve& curve) {
  const std::size_t n = curve.points.size();
  if (n < 3)
    throw TooFewPoints("knee detection needs at least 3 ROC points");

  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& p : curve.points) {
    xlo = std::min(xlo, p.fpr);
    xhi = std::max(xhi, p.fpr);
    ylo = std::min(ylo, p.tpr);
    yhi = std::max(yhi, p.tpr);
  }
  const double xr = xhi > xlo ? xhi - xlo : 1.0;
  const double yr = yhi > ylo ? yhi - ylo : 1.0;
  auto nx = [&](std::size_t i) { return (curve.points[i].fpr - xlo) / xr; };
  auto ny = [&](std::size_t i) { return (curve.points[i].tpr - ylo) / yr; };

  constexpr double kPi = 3.14159265358979323846;
  constexpr double kTieTolerance = 1e-9;
  double best_angle = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  bool found = false;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double ux = nx(i - 1) - nx(i), uy = ny(i - 1) - ny(i);
    const double vx = nx(i + 1) - nx(i), vy = ny(i + 1) - ny(i);
    const double nu = std::hypot(ux, uy), nv = std::hypot(vx, vy);
    double angle = kPi;
    if (nu > 0.0 && nv > 0.0) {
      const double c = std::clamp((ux * vx + uy * vy) / (nu * nv), -1.0, 1.0);
      angle = std::acos(c);
    }
    if (!found || angle < best_angle - kTieTolerance) {
      best_angle = angle;
      best_index = i;
      found = true;
    }
  }
  return best_index;
}

namespace {

std::string set_key(const std::vector<GeneId>& sorted_ids) {
  std::string key;
  for (const auto& s : sorted_ids) {
    key += s;
    key += '\t';
  }
  return key;
}

}  // namespace

ModuleSet minimal_modules(const std::vector<std::pair<GeneId, GeneId>>& edges) {
  if (edges.empty()) throw ValidationError("empty regulatory edge set");
  std::map<GeneId, std::unordered_set<GeneId>> targets_of;
  for (const auto& [reg, tgt] : edges) targets_of[reg].insert(tgt);

  std::map<std::string, GeneId> owner;  // canonical target set -> module id
  std::map<GeneId, std::vector<GeneId>> chosen;
  for (const auto& [reg, tgts] : targets_of) {
    if (tgts.size() < 2) continue;
    std::vector<GeneId> members(tgts.begin(), tgts.end());
    std::sort(members.begin(), members.end());
    const std::string key = set_key(members);
    auto it = owner.find(key);
    if (it == owner.end()) {
      owner.emplace(key, reg);
      chosen.emplace(reg, std::move(members));
    } else if (reg < it->second) {
      chosen.erase(it->second);
      chosen.emplace(reg, std::move(members));
      it->second = reg;
    }
  }
  std::vector<Module> modules;
  for (auto& [id, members] : chosen)
    modules.push_back(Module{id, std::move(members)});
  return ModuleSet(std::move(modules), true);
}

ModuleSet strict_modules(const std::vector<std::pair<GeneId, GeneId>>& edges) {
  if (edges.empty()) throw ValidationError("empty regulatory edge set");
  std::map<GeneId, std::unordered_set<GeneId>> regulators_of;
  for (const auto& [reg, tgt] : edges) regulators_of[tgt].insert(reg);

  std::map<std::string, std::vector<GeneId>> groups;
  for (const auto& [tgt, regs] : regulators_of) {
    std::vector<GeneId> key(regs.begin(), regs.end());
    std::sort(key.begin(), key.end());
    groups[set_key(key)].push_back(tgt);  // targets arrive in sorted order
  }
  std::vector<std::vector<GeneId>> kept;
  for (auto& [_, members] : groups)
    if (members.size() >= 2) kept.push_back(std::move(members));
  std::sort(kept.begin(), kept.end());

  std::vector<Module> modules;
  for (std::size_t k = 0; k < kept.size(); ++k)
    modules.push_back(Module{"S" + std::to_string(k + 1), std::move(kept[k])});
  return ModuleSet(std::move(modules), false);
}

}  // namespace modclust::evalkit
