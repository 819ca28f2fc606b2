#ifndef OFESI_MODEL_IO_HPP
#define OFESI_MODEL_IO_HPP

#include <string>
#include <string_view>

#include "ofesi/coarse_graph.hpp"
#include "ofesi/refiner.hpp"

namespace ofesi {

inline constexpr int kModelFormatVersion = 1;

/// Model document (JSON, see docs/formats.md). Output is byte-stable: keys
/// follow container order and every count is an integer.
std::string export_model(const RefinedModel& model);

/// Throws ParseError (with line/column or a JSON path), VersionError or
/// IntegrityError.
RefinedModel import_model(std::string_view text);

struct GraphOptions {
  bool include_end = false;  ///< emit the __END__ node and edges into it
};

/// Graphviz DOT digraph, one node per state and one edge per observed
/// (state, action, next state) with its count.
std::string export_graph(const CoarseModel& model, const GraphOptions& options = {});

/// As above at substate level. Split states are labelled "State/Action",
/// unsplit states keep their plain name.
std::string export_graph(const RefinedModel& model, const GraphOptions& options = {});

}  // namespace ofesi

#endif  // OFESI_MODEL_IO_HPP
