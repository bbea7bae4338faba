#pragma once
// Tab-separated file formats.  All files are UTF-8; lines starting with '#'
// are comments, except that in dendrogram files '#' followed by a digit names
// an internal node.  Reals are written in shortest round-trip form unless a
// fixed 12-significant-digit table format is called for.

#include <string>
#include <utility>
#include <vector>

#include "modclust/core.hpp"

namespace modclust::io {

ExpressionMatrix read_expression(const std::string& path,
                                 bool samples_as_rows = false);
void write_expression(const std::string& path, const ExpressionMatrix& expr);

CorrelationMatrix read_matrix(const std::string& path);
void write_matrix(const std::string& path, const CorrelationMatrix& mat);

// Module/prior/gold files: one module per line, id then member genes.
// The overlapping flag is detected from the content on read.
ModuleSet read_modules(const std::string& path);
void write_modules(const std::string& path, const ModuleSet& mods);

PriorClusterSet read_priors(const std::string& path);
void write_priors(const std::string& path, const PriorClusterSet& priors);

// Edge lists: regulator, target, optional ignored weight.
std::vector<std::pair<GeneId, GeneId>> read_edges(const std::string& path);

Dendrogram read_dendrogram(const std::string& path);
void write_dendrogram(const std::string& path, const Dendrogram& tree);

RocCurve read_roc(const std::string& path);
void write_roc(const std::string& path, const RocCurve& curve);

// Shortest decimal form that parses back to the identical double.
std::string format_real(double v);
// Fixed 12-significant-digit form for report tables.
std::string format_real_12(double v);

double parse_real(const std::string& tok, const std::string& context);

// FNV-1a 64-bit digest of the raw file bytes, as 16 hex characters.
std::string file_digest(const std::string& path);

// Filesystem-safe single path component derived from a cluster/module name.
std::string sanitize_component(const std::string& name);

}  // namespace modclust::io
