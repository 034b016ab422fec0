#include "df/trace_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace df {

using nlohmann::json;

namespace {

std::string row_error(const char* what, std::size_t line_no, const std::string& detail) {
  return std::string(what) + " line " + std::to_string(line_no) + ": " + detail;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::int64_t parse_round_index(const std::string& cell, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(cell, &used);
    if (used != cell.size() || v < 1) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw config_error(row_error("trace", line_no, "bad round index '" + cell + "'"));
  }
}

double parse_cell(const std::string& cell, std::size_t line_no, const char* col) {
  try {
    return parse_double(cell);
  } catch (const config_error&) {
    throw config_error(
        row_error("trace", line_no, "column " + std::string(col) + ": bad number '" + cell + "'"));
  }
}

json header_json(const OutcomeSpace& space, std::uint64_t seed, const ConfigMap& config) {
  json j;
  j["space"] = space_to_string(space);
  j["seed"] = seed;
  j["config"] = config;
  j["digest"] = config_digest(config);
  return j;
}

TraceHeader parse_header_line(const std::string& line) {
  if (line.size() < 2 || line[0] != '#')
    throw config_error("trace line 1: expected '# {...}' header, got '" + line.substr(0, 40) + "'");
  json j;
  try {
    j = json::parse(line.substr(1));
  } catch (const json::exception& e) {
    throw config_error(std::string("trace line 1: bad header JSON: ") + e.what());
  }
  TraceHeader h;
  try {
    h.space = space_from_string(j.at("space").get<std::string>());
    h.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("config")) h.config = j.at("config").get<ConfigMap>();
  } catch (const json::exception& e) {
    throw config_error(std::string("trace line 1: bad header fields: ") + e.what());
  }
  return h;
}

void write_header_and_columns(std::ostream& out, const OutcomeSpace& space, std::uint64_t seed,
                              const ConfigMap& config, std::size_t dim, bool with_forecast) {
  out << "# " << header_json(space, seed, config).dump() << "\n";
  out << "t";
  for (std::size_t i = 0; i < dim; ++i) out << ",x_" << i;
  if (with_forecast)
    out << ",p,y,s_value,branch\n";
  else
    out << ",y\n";
}

// Returns the context dimension encoded by the column line.
std::size_t parse_column_line(const std::string& line, bool with_forecast) {
  const std::vector<std::string> cols = split_row(line);
  const std::size_t fixed = with_forecast ? 5 : 2;  // t plus trailing columns
  if (cols.size() < fixed || cols[0] != "t")
    throw config_error("trace line 2: expected column names starting with 't'");
  const std::size_t dim = cols.size() - fixed;
  for (std::size_t i = 0; i < dim; ++i) {
    if (cols[1 + i] != "x_" + std::to_string(i))
      throw config_error("trace line 2: expected column 'x_" + std::to_string(i) + "', got '" +
                         cols[1 + i] + "'");
  }
  const char* tail_forecast[] = {"p", "y", "s_value", "branch"};
  const char* tail_dataset[] = {"y"};
  const char** tail = with_forecast ? tail_forecast : tail_dataset;
  for (std::size_t i = 0; i + 1 < fixed; ++i) {
    if (cols[1 + dim + i] != tail[i])
      throw config_error("trace line 2: expected column '" + std::string(tail[i]) + "', got '" +
                         cols[1 + dim + i] + "'");
  }
  return dim;
}

std::size_t common_dimension(const std::vector<Context>& xs) {
  const std::size_t dim = xs.empty() ? 0 : xs.front().size();
  for (const Context& x : xs)
    if (x.size() != dim) throw game_error("serialize: context dimension varies across rounds");
  return dim;
}

}  // namespace

std::string config_digest(const ConfigMap& config) {
  std::string flat;
  for (const auto& [k, v] : config) {
    flat += k;
    flat += '=';
    flat += v;
    flat += '\n';
  }
  return hex64(fnv1a64(flat));
}

std::string space_to_string(const OutcomeSpace& space) {
  if (space.kind == SpaceKind::Binary) return "binary";
  return "interval(" + fmt_double(space.y_min) + "," + fmt_double(space.y_max) + "]";
}

OutcomeSpace space_from_string(const std::string& text) {
  if (text == "binary") return OutcomeSpace::binary();
  const std::string prefix = "interval(";
  if (text.rfind(prefix, 0) == 0 && !text.empty() && text.back() == ']') {
    const std::string body = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    const std::size_t comma = body.find(',');
    if (comma != std::string::npos) {
      return OutcomeSpace::interval(parse_double(body.substr(0, comma)),
                                    parse_double(body.substr(comma + 1)));
    }
  }
  throw config_error("unknown outcome space '" + text + "'");
}

void write_trace(std::ostream& out, const GameTrace& trace, const ConfigMap& config) {
  std::vector<Context> xs;
  xs.reserve(trace.rounds.size());
  for (const Round& r : trace.rounds) xs.push_back(r.x);
  const std::size_t dim = common_dimension(xs);

  write_header_and_columns(out, trace.space, trace.seed, config, dim, true);
  std::int64_t t = 0;
  for (const Round& r : trace.rounds) {
    out << ++t;
    for (double xi : r.x) out << ',' << fmt_double(xi);
    out << ',' << fmt_double(r.f.value) << ',' << fmt_double(r.y) << ','
        << fmt_double(r.f.s_value) << ',' << to_string(r.f.branch) << "\n";
  }
  if (!out) throw game_error("trace write failed");
}

void write_trace_file(const std::string& path, const GameTrace& trace, const ConfigMap& config) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open '" + path + "' for writing");
  write_trace(out, trace, config);
}

ParsedTrace read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw config_error("trace line 1: empty input");
  ParsedTrace parsed;
  parsed.header = parse_header_line(line);
  parsed.trace.space = parsed.header.space;
  parsed.trace.seed = parsed.header.seed;

  if (!std::getline(in, line)) throw config_error("trace line 2: missing column names");
  const std::size_t dim = parse_column_line(line, true);

  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw config_error(row_error("trace", line_no, "empty row"));
    const std::vector<std::string> cells = split_row(line);
    if (cells.size() != dim + 5)
      throw config_error(row_error("trace", line_no,
                                   "expected " + std::to_string(dim + 5) + " columns, got " +
                                       std::to_string(cells.size())));
    const std::int64_t t = parse_round_index(cells[0], line_no);
    if (t != static_cast<std::int64_t>(parsed.trace.rounds.size()) + 1)
      throw config_error(row_error("trace", line_no, "round index out of order"));

    Round r;
    r.x.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i)
      r.x.push_back(parse_cell(cells[1 + i], line_no, ("x_" + std::to_string(i)).c_str()));
    r.f.value = parse_cell(cells[1 + dim], line_no, "p");
    r.y = parse_cell(cells[2 + dim], line_no, "y");
    r.f.s_value = parse_cell(cells[3 + dim], line_no, "s_value");
    try {
      r.f.branch = branch_from_string(cells[4 + dim]);
    } catch (const config_error& e) {
      throw config_error(row_error("trace", line_no, e.what()));
    }
    if (!parsed.trace.space.contains(r.y))
      throw config_error(row_error("trace", line_no, "outcome outside the declared space"));
    parsed.trace.rounds.push_back(std::move(r));
  }
  return parsed;
}

ParsedTrace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open trace file '" + path + "'");
  return read_trace(in);
}

void write_dataset(std::ostream& out, const Dataset& data, std::uint64_t seed,
                   const ConfigMap& config) {
  if (data.xs.size() != data.ys.size()) throw game_error("serialize: mismatched dataset columns");
  const std::size_t dim = common_dimension(data.xs);
  write_header_and_columns(out, data.space, seed, config, dim, false);
  for (std::size_t i = 0; i < data.xs.size(); ++i) {
    out << (i + 1);
    for (double xi : data.xs[i]) out << ',' << fmt_double(xi);
    out << ',' << fmt_double(data.ys[i]) << "\n";
  }
  if (!out) throw game_error("dataset write failed");
}

void write_dataset_file(const std::string& path, const Dataset& data, std::uint64_t seed,
                        const ConfigMap& config) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open '" + path + "' for writing");
  write_dataset(out, data, seed, config);
}

ParsedDataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw config_error("trace line 1: empty input");
  ParsedDataset parsed;
  parsed.header = parse_header_line(line);
  parsed.data.space = parsed.header.space;

  if (!std::getline(in, line)) throw config_error("trace line 2: missing column names");
  const std::size_t dim = parse_column_line(line, false);

  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw config_error(row_error("trace", line_no, "empty row"));
    const std::vector<std::string> cells = split_row(line);
    if (cells.size() != dim + 2)
      throw config_error(row_error("trace", line_no,
                                   "expected " + std::to_string(dim + 2) + " columns, got " +
                                       std::to_string(cells.size())));
    const std::int64_t t = parse_round_index(cells[0], line_no);
    if (t != static_cast<std::int64_t>(parsed.data.xs.size()) + 1)
      throw config_error(row_error("trace", line_no, "round index out of order"));
    Context x;
    x.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i)
      x.push_back(parse_cell(cells[1 + i], line_no, ("x_" + std::to_string(i)).c_str()));
    const double y = parse_cell(cells[1 + dim], line_no, "y");
    if (!parsed.data.space.contains(y))
      throw config_error(row_error("trace", line_no, "outcome outside the declared space"));
    parsed.data.xs.push_back(std::move(x));
    parsed.data.ys.push_back(y);
  }
  return parsed;
}

ParsedDataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open dataset file '" + path + "'");
  return read_dataset(in);
}

}  // namespace df
