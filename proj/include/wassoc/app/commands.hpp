#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wassoc/embedding.hpp"

namespace wassoc::app {

enum class ReportFormat { json, csv };

ReportFormat parse_report_format(std::string_view token);

// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,  // load or validation failure
  kExitDegenerate = 2,  // empty slice, single group, nothing to report
};

struct RunConfig {
  std::optional<std::filesystem::path> assoc;
  std::optional<std::filesystem::path> respondents;
  std::optional<std::filesystem::path> ngrams;
  std::optional<std::filesystem::path> lemmas;
  std::optional<std::filesystem::path> thesaurus;
  std::string filter;
  std::string by;  // attribute name; "all" or empty means no grouping
  std::filesystem::path out = ".";
  ReportFormat format = ReportFormat::json;
  std::uint64_t seed = 42;
  bool normalize = true;

  EmbeddingConfig embed;      // embed.seed is overridden by `seed`
  std::size_t iterations = 10000;  // test

  std::vector<std::filesystem::path> models;  // nn
  std::string query;                          // nn
  std::size_t top_n = 10;                     // nn
  std::size_t top_k = 10;                     // report
};

int cmd_score(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_test(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_embed(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_nn(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& err);

// File-name-safe form of a slice label used in model_<label>.txt.
std::string model_file_label(std::string_view label);

}  // namespace wassoc::app
