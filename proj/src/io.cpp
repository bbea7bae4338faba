#include "modclust/io.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace modclust::io {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

// Dendrogram files use '#' + digits for internal nodes; everywhere else a
// leading '#' starts a comment.
bool is_comment(const std::string& line) {
  return !line.empty() && line[0] == '#' &&
         (line.size() < 2 || !std::isdigit(static_cast<unsigned char>(line[1])));
}

struct LineReader {
  std::ifstream in;
  std::string path;
  std::size_t lineno = 0;

  explicit LineReader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw InputFormatError("cannot open '" + p + "' for reading");
  }

  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw InputFormatError(path + ":" + std::to_string(lineno) + ": " + msg);
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputFormatError("cannot open '" + path + "' for writing");
  return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw InputFormatError("write to '" + path + "' failed");
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_real_12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

double parse_real(const std::string& tok, const std::string& context) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw InputFormatError(context + ": cannot parse real '" + tok + "'");
  return v;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFormatError("cannot open '" + path + "' for digest");
  std::uint64_t h = 14695981039346656037ULL;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return std::string(out);
}

std::string sanitize_component(const std::string& name) {
  std::string out;
  for (char ch : name) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '.' || ch == '_' ||
                    ch == '-';
    out.push_back(ok ? ch : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "cluster";
  return out;
}

ExpressionMatrix read_expression(const std::string& path, bool samples_as_rows) {
  LineReader r(path);
  std::string line;
  std::vector<std::string> header;
  while (r.next(line)) {
    if (is_comment(line) || line.empty()) continue;
    header = split_tabs(line);
    break;
  }
  if (header.empty()) throw InputFormatError(path + ": no header row");

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  while (r.next(line)) {
    if (is_comment(line) || line.empty()) continue;
    rows.push_back(split_tabs(line));
    row_lines.push_back(r.lineno);
  }
  if (rows.empty()) r.fail("no data rows");
  auto at_line = [&](std::size_t i) {
    return path + ":" + std::to_string(row_lines[i]);
  };

  if (!samples_as_rows) {
    // header: corner cell then sample labels; one gene per row
    if (header.size() < 2) r.fail("header needs sample labels");
    std::vector<std::string> samples(header.begin() + 1, header.end());
    std::vector<GeneId> genes;
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != samples.size() + 1)
        throw InputFormatError(at_line(i) + ": row has " +
                               std::to_string(rows[i].size()) +
                               " fields, expected " +
                               std::to_string(samples.size() + 1));
      genes.push_back(rows[i][0]);
      for (std::size_t j = 0; j < samples.size(); ++j)
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            parse_real(rows[i][j + 1], at_line(i));
    }
    return ExpressionMatrix(std::move(genes), std::move(samples),
                            std::move(values));
  }

  // Transposed layout: header lists gene ids (with an optional leading
  // "sample" corner cell); each row is one sample.
  bool corner = header[0] == "sample" || header[0].empty();
  std::vector<GeneId> genes(header.begin() + (corner ? 1 : 0), header.end());
  if (genes.empty()) r.fail("header lists no genes");
  std::vector<std::string> samples;
  Eigen::MatrixXd values(static_cast<Eigen::Index>(genes.size()),
                         static_cast<Eigen::Index>(rows.size()));
  for (std::size_t s = 0; s < rows.size(); ++s) {
    const auto& row = rows[s];
    const std::size_t expect = genes.size() + (corner ? 1 : 0);
    if (row.size() != expect)
      throw InputFormatError(at_line(s) + ": sample row has " +
                             std::to_string(row.size()) +
                             " fields, expected " + std::to_string(expect));
    samples.push_back(corner ? row[0] : "s" + std::to_string(s + 1));
    for (std::size_t g = 0; g < genes.size(); ++g)
      values(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(s)) =
          parse_real(row[g + (corner ? 1 : 0)], at_line(s));
  }
  return ExpressionMatrix(std::move(genes), std::move(samples),
                          std::move(values));
}

void write_expression(const std::string& path, const ExpressionMatrix& expr) {
  auto out = open_out(path);
  out << "gene";
  for (const auto& s : expr.samples()) out << '\t' << s;
  out << '\n';
  for (Eigen::Index i = 0; i < expr.n_genes(); ++i) {
    out << expr.genes()[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < expr.n_samples(); ++j)
      out << '\t' << format_real(expr.values()(i, j));
    out << '\n';
  }
  finish_out(out, path);
}

CorrelationMatrix read_matrix(const std::string& path) {
  LineReader r(path);
  std::string line;
  MatrixMeta meta;
  std::vector<std::string> header;
  while (r.next(line)) {
    if (line.empty()) continue;
    if (is_comment(line)) {
      auto fields = split_tabs(line);
      if (fields.size() == 3 && fields[0] == "#meta") {
        if (fields[1] == "metric") {
          auto m = metric_from_string(fields[2]);
          if (!m) r.fail("unknown metric tag '" + fields[2] + "'");
          meta.metric = *m;
        } else if (fields[1] == "supervised") {
          meta.supervised = fields[2] == "1";
        } else if (fields[1] == "deconvolved") {
          meta.deconvolved = fields[2] == "1";
        }
      }
      continue;
    }
    header = split_tabs(line);
    break;
  }
  if (header.size() < 3) throw InputFormatError(path + ": no matrix header");
  std::vector<GeneId> genes(header.begin() + 1, header.end());
  const auto n = static_cast<Eigen::Index>(genes.size());
  Eigen::MatrixXd values(n, n);
  Eigen::Index i = 0;
  while (r.next(line)) {
    if (is_comment(line) || line.empty()) continue;
    if (i >= n) r.fail("more rows than header genes");
    auto fields = split_tabs(line);
    if (fields.size() != genes.size() + 1)
      r.fail("row has " + std::to_string(fields.size()) + " fields, expected " +
             std::to_string(genes.size() + 1));
    if (fields[0] != genes[static_cast<std::size_t>(i)])
      r.fail("row label '" + fields[0] + "' does not match header order");
    for (Eigen::Index j = 0; j < n; ++j)
      values(i, j) = parse_real(fields[static_cast<std::size_t>(j) + 1], path);
    ++i;
  }
  if (i != n)
    throw InputFormatError(path + ": expected " + std::to_string(n) +
                           " rows, got " + std::to_string(i));
  return CorrelationMatrix(std::move(genes), std::move(values), meta);
}

void write_matrix(const std::string& path, const CorrelationMatrix& mat) {
  auto out = open_out(path);
  out << "#meta\tmetric\t" << to_string(mat.meta().metric) << '\n';
  out << "#meta\tsupervised\t" << (mat.meta().supervised ? 1 : 0) << '\n';
  out << "#meta\tdeconvolved\t" << (mat.meta().deconvolved ? 1 : 0) << '\n';
  out << "gene";
  for (const auto& g : mat.genes()) out << '\t' << g;
  out << '\n';
  for (Eigen::Index i = 0; i < mat.size(); ++i) {
    out << mat.genes()[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < mat.size(); ++j)
      out << '\t' << format_real(mat.values()(i, j));
    out << '\n';
  }
  finish_out(out, path);
}

namespace {

std::vector<Module> read_module_lines(const std::string& path) {
  LineReader r(path);
  std::string line;
  std::vector<Module> mods;
  while (r.next(line)) {
    if (is_comment(line) || line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() < 2) r.fail("module line needs an id and at least one gene");
    Module m;
    m.id = fields[0];
    m.members.assign(fields.begin() + 1, fields.end());
    mods.push_back(std::move(m));
  }
  return mods;
}

bool any_overlap(const std::vector<Module>& mods) {
  std::unordered_set<GeneId> seen;
  for (const auto& m : mods)
    for (const auto& g : m.members)
      if (!seen.insert(g).second) return true;
  return false;
}

}  // namespace

ModuleSet read_modules(const std::string& path) {
  auto mods = read_module_lines(path);
  if (mods.empty()) throw InputFormatError(path + ": no modules");
  const bool overlapping = any_overlap(mods);
  return ModuleSet(std::move(mods), overlapping);
}

void write_modules(const std::string& path, const ModuleSet& mods) {
  auto out = open_out(path);
  for (const auto& m : mods.modules()) {
    out << m.id;
    for (const auto& g : m.members) out << '\t' << g;
    out << '\n';
  }
  finish_out(out, path);
}

PriorClusterSet read_priors(const std::string& path) {
  auto mods = read_module_lines(path);
  std::vector<PriorCluster> clusters;
  for (auto& m : mods)
    clusters.push_back(PriorCluster{std::move(m.id), std::move(m.members)});
  return PriorClusterSet(std::move(clusters));
}

void write_priors(const std::string& path, const PriorClusterSet& priors) {
  auto out = open_out(path);
  for (const auto& c : priors.clusters()) {
    out << c.name;
    for (const auto& g : c.members) out << '\t' << g;
    out << '\n';
  }
  finish_out(out, path);
}

std::vector<std::pair<GeneId, GeneId>> read_edges(const std::string& path) {
  LineReader r(path);
  std::string line;
  std::vector<std::pair<GeneId, GeneId>> edges;
  while (r.next(line)) {
    if (is_comment(line) || line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2 && fields.size() != 3)
      r.fail("edge line needs 2 or 3 fields");
    if (!valid_gene_id(fields[0]) || !valid_gene_id(fields[1]))
      r.fail("bad gene identifier");
    edges.emplace_back(fields[0], fields[1]);
  }
  return edges;
}

namespace {

bool looks_internal(const std::string& tok) {
  if (tok.size() < 2 || tok[0] != '#') return false;
  for (std::size_t i = 1; i < tok.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(tok[i]))) return false;
  return true;
}

}  // namespace

Dendrogram read_dendrogram(const std::string& path) {
  LineReader r(path);
  std::string line;
  std::vector<GeneId> leaves;
  std::unordered_map<GeneId, int> leaf_index;
  std::vector<std::array<std::string, 2>> child_tokens;
  std::vector<double> heights;
  while (r.next(line)) {
    if (line.empty()) continue;
    if (is_comment(line)) {
      auto fields = split_tabs(line);
      if (!fields.empty() && fields[0] == "#leaves") {
        for (std::size_t i = 1; i < fields.size(); ++i) {
          if (!leaf_index.emplace(fields[i], static_cast<int>(leaves.size()))
                   .second)
            r.fail("duplicate leaf '" + fields[i] + "'");
          leaves.push_back(fields[i]);
        }
      }
      continue;
    }
    auto fields = split_tabs(line);
    if (fields.size() != 3) r.fail("merge line needs 3 fields");
    child_tokens.push_back({fields[0], fields[1]});
    heights.push_back(parse_real(fields[2], path));
  }
  if (leaves.empty()) {
    // No #leaves header: leaf order = first appearance in merge lines.
    for (const auto& pair : child_tokens)
      for (const auto& tok : pair)
        if (!looks_internal(tok) && !leaf_index.count(tok)) {
          leaf_index.emplace(tok, static_cast<int>(leaves.size()));
          leaves.push_back(tok);
        }
  }
  const int n = static_cast<int>(leaves.size());
  std::vector<DendrogramMerge> merges;
  for (std::size_t k = 0; k < child_tokens.size(); ++k) {
    DendrogramMerge m;
    int* slots[2] = {&m.left, &m.right};
    for (int c = 0; c < 2; ++c) {
      const std::string& tok = child_tokens[k][static_cast<std::size_t>(c)];
      if (looks_internal(tok)) {
        const long idx = std::strtol(tok.c_str() + 1, nullptr, 10);
        if (idx < 1 || idx > static_cast<long>(k))
          throw InputFormatError(path + ": merge " + std::to_string(k + 1) +
                                 " references '" + tok + "' before it exists");
        *slots[c] = n + static_cast<int>(idx) - 1;
      } else {
        auto it = leaf_index.find(tok);
        if (it == leaf_index.end())
          throw InputFormatError(path + ": unknown leaf '" + tok + "'");
        *slots[c] = it->second;
      }
    }
    m.height = heights[k];
    merges.push_back(m);
  }
  return Dendrogram(std::move(leaves), std::move(merges));
}

void write_dendrogram(const std::string& path, const Dendrogram& tree) {
  for (const auto& leaf : tree.leaves())
    if (looks_internal(leaf))
      throw ValidationError("leaf name '" + leaf +
                            "' collides with internal node syntax");
  auto out = open_out(path);
  out << "#leaves";
  for (const auto& leaf : tree.leaves()) out << '\t' << leaf;
  out << '\n';
  const int n = tree.n_leaves();
  auto name = [&](int node) -> std::string {
    if (node < n) return tree.leaves()[static_cast<std::size_t>(node)];
    return "#" + std::to_string(node - n + 1);
  };
  for (const auto& m : tree.merges())
    out << name(m.left) << '\t' << name(m.right) << '\t'
        << format_real(m.height) << '\n';
  finish_out(out, path);
}

RocCurve read_roc(const std::string& path) {
  LineReader r(path);
  std::string line;
  bool saw_header = false;
  RocCurve curve;
  while (r.next(line)) {
    if (is_comment(line) || line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 7) r.fail("ROC row needs 7 fields");
    if (!saw_header) {
      saw_header = true;  // header row: eps fpr tpr tp fp tn fn
      continue;
    }
    RocPoint p;
    if (fields[0] == "-") {
      p.eps = std::numeric_limits<double>::quiet_NaN();
      p.synthetic = true;
    } else {
      p.eps = parse_real(fields[0], path);
    }
    p.fpr = parse_real(fields[1], path);
    p.tpr = parse_real(fields[2], path);
    p.tp = static_cast<std::uint64_t>(std::stoull(fields[3]));
    p.fp = static_cast<std::uint64_t>(std::stoull(fields[4]));
    p.tn = static_cast<std::uint64_t>(std::stoull(fields[5]));
    p.fn = static_cast<std::uint64_t>(std::stoull(fields[6]));
    curve.points.push_back(p);
  }
  if (!saw_header) throw InputFormatError(path + ": missing ROC header");
  return curve;
}

void write_roc(const std::string& path, const RocCurve& curve) {
  auto out = open_out(path);
  out << "eps\tfpr\ttpr\ttp\tfp\ttn\tfn\n";
  for (const auto& p : curve.points) {
    if (p.synthetic)
      out << '-';
    else
      out << format_real_12(p.eps);
    out << '\t' << format_real_12(p.fpr) << '\t' << format_real_12(p.tpr)
        << '\t' << p.tp << '\t' << p.fp << '\t' << p.tn << '\t' << p.fn << '\n';
  }
  finish_out(out, path);
}

}  // namespace modclust::io
