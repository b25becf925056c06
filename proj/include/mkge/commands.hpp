#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "mkge/config.hpp"
#include "mkge/evaluation.hpp"
#include "mkge/kg.hpp"

namespace mkge {

/// Everything the commands share after ingestion: finalized graph, optional
/// feature matrices, filter index and candidate pools.
struct Workspace {
  KnowledgeGraph graph;
  std::optional<FeatureMatrix> visual;
  std::optional<FeatureMatrix> textual;
  FilterIndex filter;
  CandidateRegistry candidates;
};

Workspace load_workspace(const RunConfig& config);

// Subcommand entry points. Each returns a process exit code and reports
// through `out`; errors raise mkge::Error with a module-qualified message.
int cmd_inspect(const RunConfig& config, std::ostream& out);
int cmd_build_split(const RunConfig& config, std::ostream& out);
int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, const std::string& checkpoint,
             std::ostream& out);
int cmd_zero_shot(const RunConfig& config, std::ostream& out);
int cmd_retrieve(const RunConfig& config, const std::string& checkpoint,
                 const std::string& query, std::ostream& out);

}  // namespace mkge
