#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "df/batch.hpp"
#include "df/game.hpp"

namespace df {

// Canonical run configuration attached to serialized artifacts: flat string
// keys, values already in their printed form.
using ConfigMap = std::map<std::string, std::string>;

std::string config_digest(const ConfigMap& config);  // 16 hex digits

// Metadata carried on the leading "# {...}" line of a trace CSV.
struct TraceHeader {
  OutcomeSpace space = OutcomeSpace::binary();
  std::uint64_t seed = 0;
  ConfigMap config;
};

std::string space_to_string(const OutcomeSpace& space);
OutcomeSpace space_from_string(const std::string& text);

// Layout: one comment line with the JSON header, one column-name line
// (t, x_0..x_{d-1}, p, y, s_value, branch), then one row per round.
// Doubles print as shortest round-trip decimals, so read(write(trace))
// reproduces every value bit for bit.
void write_trace(std::ostream& out, const GameTrace& trace, const ConfigMap& config);
void write_trace_file(const std::string& path, const GameTrace& trace, const ConfigMap& config);

struct ParsedTrace {
  GameTrace trace;
  TraceHeader header;
};

ParsedTrace read_trace(std::istream& in);
ParsedTrace read_trace_file(const std::string& path);

// Dataset CSV shares the header line but carries only t, x_0.., y columns.
void write_dataset(std::ostream& out, const Dataset& data, std::uint64_t seed,
                   const ConfigMap& config);
void write_dataset_file(const std::string& path, const Dataset& data, std::uint64_t seed,
                        const ConfigMap& config);

struct ParsedDataset {
  Dataset data;
  TraceHeader header;
};

ParsedDataset read_dataset(std::istream& in);
ParsedDataset read_dataset_file(const std::string& path);

}  // namespace df
