#include "margin/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace margin::io {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

std::optional<double> parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

std::optional<long long> parse_integer(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::string location(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw Error("cannot format number");
  return {buffer, ptr};
}

CsvTable read_numeric_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_number = 0;
  std::size_t width = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    std::vector<std::optional<double>> parsed;
    parsed.reserve(cells.size());
    for (auto cell : cells) parsed.push_back(parse_double(cell));
    const bool numeric = std::all_of(parsed.begin(), parsed.end(), [](const auto& v) { return v.has_value(); });
    if (first_content) {
      first_content = false;
      width = cells.size();
      if (!numeric) {
        for (auto cell : cells) table.header.emplace_back(cell);
        continue;
      }
    }
    if (cells.size() != width) {
      throw Error(location(source, line_number) + ": expected " + std::to_string(width) + " columns, found " +
                  std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(width);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parsed[c]) {
        throw Error(location(source, line_number) + ", column " + std::to_string(c + 1) + ": cannot parse '" +
                    std::string(cells[c]) + "' as a number");
      }
      if (!std::isfinite(*parsed[c])) {
        throw Error(location(source, line_number) + ", column " + std::to_string(c + 1) + ": non-finite value '" +
                    std::string(cells[c]) + "'");
      }
      row.push_back(*parsed[c]);
    }
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) table.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  }
  return table;
}

CsvTable read_numeric_csv(const fs::path& path) {
  auto in = open_input(path);
  return read_numeric_csv(in, path.string());
}

std::vector<int> read_labels(const fs::path& path) {
  const auto table = read_numeric_csv(path);
  if (table.values.cols() != 1 && table.values.rows() > 0) {
    throw Error(path.string() + ": a label file must have exactly one column");
  }
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(table.values.rows()));
  for (Index r = 0; r < table.values.rows(); ++r) {
    const double v = table.values(r, 0);
    if (v != std::round(v) || std::abs(v) > 1e9) {
      throw Error(path.string() + ": row " + std::to_string(r + 1) + " holds a non-integer label");
    }
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

std::vector<bool> read_flags(const fs::path& path) {
  const auto values = read_labels(path);
  std::vector<bool> flags;
  flags.reserve(values.size());
  for (std::size_t r = 0; r < values.size(); ++r) {
    if (values[r] != 0 && values[r] != 1) {
      throw Error(path.string() + ": row " + std::to_string(r + 1) + " holds a flag other than 0 or 1");
    }
    flags.push_back(values[r] == 1);
  }
  return flags;
}

Matrix read_signal(const fs::path& path) {
  const auto table = read_numeric_csv(path);
  if (!table.header.empty() && table.header.front() == "node_id") {
    if (table.values.cols() < 2) throw Error(path.string() + ": signal file has no value column");
    for (Index r = 0; r < table.values.rows(); ++r) {
      if (table.values(r, 0) != static_cast<double>(r)) {
        throw Error(path.string() + ": node_id column must list 0..n-1 in order (row " + std::to_string(r + 1) + ")");
      }
    }
    return table.values.rightCols(table.values.cols() - 1);
  }
  return table.values;
}

Dataset load_dataset(const fs::path& features, const std::optional<fs::path>& labels,
                     const std::optional<fs::path>& flags) {
  Dataset dataset;
  dataset.features = read_numeric_csv(features).values;
  const auto n = static_cast<std::size_t>(dataset.features.rows());
  if (labels) {
    dataset.labels = read_labels(*labels);
    if (dataset.labels->size() != n) {
      throw Error("row count mismatch: " + features.string() + " has " + std::to_string(n) + " rows but " +
                  labels->string() + " has " + std::to_string(dataset.labels->size()));
    }
  }
  if (flags) {
    dataset.flags = read_flags(*flags);
    if (dataset.flags->size() != n) {
      throw Error("row count mismatch: " + features.string() + " has " + std::to_string(n) + " rows but " +
                  flags->string() + " has " + std::to_string(dataset.flags->size()));
    }
  }
  dataset.check();
  return dataset;
}

void write_graph(std::ostream& out, const Graph& graph) {
  out << "#nodes " << graph.size() << '\n';
  for (const auto& e : graph.edges()) out << e.src << ' ' << e.dst << ' ' << format_double(e.weight) << '\n';
}

Graph read_graph(std::istream& in, bool allow_self_loops, const std::string& source) {
  std::optional<Index> declared;
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_number = 0;
  Index max_index = -1;
  while (std::getline(in, line)) {
    ++line_number;
    const auto content = trim(line);
    if (content.empty()) continue;
    if (content.front() == '#') {
      const auto tokens = split_whitespace(content.substr(1));
      if (tokens.size() == 2 && tokens[0] == "nodes") {
        const auto n = parse_integer(tokens[1]);
        if (!n || *n < 0) throw Error(location(source, line_number) + ": bad node count");
        declared = static_cast<Index>(*n);
      }
      continue;
    }
    const auto tokens = split_whitespace(content);
    if (tokens.size() != 3) {
      throw Error(location(source, line_number) + ": expected 'src dst weight', found " +
                  std::to_string(tokens.size()) + " fields");
    }
    const auto src = parse_integer(tokens[0]);
    const auto dst = parse_integer(tokens[1]);
    const auto weight = parse_double(tokens[2]);
    if (!src || !dst || *src < 0 || *dst < 0) throw Error(location(source, line_number) + ": bad node index");
    if (!weight) throw Error(location(source, line_number) + ": cannot parse weight '" + std::string(tokens[2]) + "'");
    if (*src == *dst && !allow_self_loops) {
      throw Error(location(source, line_number) + ": self-loop on node " + std::to_string(*src) +
                  " but self-loops are disabled");
    }
    if (declared && (*src >= *declared || *dst >= *declared)) {
      throw Error(location(source, line_number) + ": node index exceeds declared node count " +
                  std::to_string(*declared));
    }
    max_index = std::max<Index>(max_index, std::max(*src, *dst));
    edges.push_back({static_cast<Index>(*src), static_cast<Index>(*dst), *weight});
  }
  const Index n = declared ? *declared : max_index + 1;
  try {
    return Graph::from_edges(n, edges, allow_self_loops);
  } catch (const Error& e) {
    throw Error(source + ": " + e.what());
  }
}

void save_graph(const Graph& graph, const fs::path& path) {
  write_file(path, [&](std::ostream& out) { write_graph(out, graph); });
}

Graph load_graph(const fs::path& path, bool allow_self_loops) {
  auto in = open_input(path);
  return read_graph(in, allow_self_loops, path.string());
}

std::vector<Index> descending_ranks(const Vector& scores) {
  const auto order = rank_descending(scores);
  std::vector<Index> ranks(order.size());
  for (std::size_t t = 0; t < order.size(); ++t) ranks[static_cast<std::size_t>(order[t])] = static_cast<Index>(t + 1);
  return ranks;
}

void write_scores_csv(std::ostream& out, const Vector& scores) {
  const auto ranks = descending_ranks(scores);
  out << "node_id,score,rank\n";
  for (Index i = 0; i < scores.size(); ++i) {
    out << i << ',' << format_double(scores[i]) << ',' << ranks[static_cast<std::size_t>(i)] << '\n';
  }
}

void write_selection_csv(std::ostream& out, const RankedSelection& sel) {
  out << "rank,node_id,score\n";
  for (std::size_t t = 0; t < sel.ids.size(); ++t) {
    out << t + 1 << ',' << sel.ids[t] << ',' << format_double(sel.scores[t]) << '\n';
  }
}

void write_function_csv(std::ostream& out, const Vector& values) {
  out << "node_id,value\n";
  for (Index i = 0; i < values.size(); ++i) out << i << ',' << format_double(values[i]) << '\n';
}

void write_recall_csv(std::ostream& out, const RecallCurve& curve) {
  out << "budget,recall\n";
  for (std::size_t t = 0; t < curve.budgets.size(); ++t) {
    out << format_double(curve.budgets[t]) << ',' << format_double(curve.recalls[t]) << '\n';
  }
}

void write_spectrum_csv(std::ostream& out, const FourierBasis& basis, const Vector& spectrum) {
  if (spectrum.size() != basis.eigenvalues.size()) throw Error("spectrum length does not match the basis");
  out << "index,eigenvalue,coefficient\n";
  for (Index j = 0; j < spectrum.size(); ++j) {
    out << j << ',' << format_double(basis.eigenvalues[j]) << ',' << format_double(spectrum[j]) << '\n';
  }
}

void write_column_csv(std::ostream& out, const std::string& name, const std::vector<int>& values) {
  out << name << '\n';
  for (int v : values) out << v << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, [&](std::ostream& out) { out << text; });
}

}  // namespace margin::io
