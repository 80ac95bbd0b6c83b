#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "margin/dataset.hpp"
#include "margin/error.hpp"
#include "margin/graph.hpp"
#include "margin/influence.hpp"
#include "margin/pipelines.hpp"
#include "margin/spectral.hpp"

namespace margin::io {

namespace fs = std::filesystem;

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;  // empty when the file has no header row
  Matrix values;
};

/// Comma-separated numeric table with an optional header row (detected when
/// the first row has a non-numeric cell). Blank lines are skipped. Parse
/// failures, ragged rows and non-finite cells raise Error naming the line
/// and column (both 1-based).
CsvTable read_numeric_csv(std::istream& in, const std::string& source = "<stream>");
CsvTable read_numeric_csv(const fs::path& path);

std::vector<int> read_labels(const fs::path& path);
std::vector<bool> read_flags(const fs::path& path);

/// Node signal: every numeric column, minus a leading `node_id` column when
/// the header names one (its values must then be 0..n-1 in order).
Matrix read_signal(const fs::path& path);

/// Features plus optional labels and flags; row counts must agree.
Dataset load_dataset(const fs::path& features, const std::optional<fs::path>& labels = std::nullopt,
                     const std::optional<fs::path>& flags = std::nullopt);

/// Edge list: optional `#nodes N` header, then `src dst weight` per
/// undirected edge (src <= dst). Other `#` lines are comments.
void write_graph(std::ostream& out, const Graph& graph);
Graph read_graph(std::istream& in, bool allow_self_loops = false, const std::string& source = "<stream>");
void save_graph(const Graph& graph, const fs::path& path);
Graph load_graph(const fs::path& path, bool allow_self_loops = false);

void write_scores_csv(std::ostream& out, const Vector& scores);          // node_id,score,rank
void write_selection_csv(std::ostream& out, const RankedSelection& sel);  // rank,node_id,score
void write_function_csv(std::ostream& out, const Vector& values);        // node_id,value
void write_recall_csv(std::ostream& out, const RecallCurve& curve);      // budget,recall
void write_spectrum_csv(std::ostream& out, const FourierBasis& basis, const Vector& spectrum);
void write_column_csv(std::ostream& out, const std::string& name, const std::vector<int>& values);

/// Opens `path` (creating parent directories) and hands the stream to
/// `writer`. Throws Error if the file cannot be written.
template <class Writer>
void write_file(const fs::path& path, Writer&& writer);

void write_text(const fs::path& path, const std::string& text);

/// 1-based position of each node in the descending-score order (ties by id).
std::vector<Index> descending_ranks(const Vector& scores);

template <class Writer>
void write_file(const fs::path& path, Writer&& writer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  writer(out);
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace margin::io
