// wassoc: word-association analysis from the command line.
//
//   wassoc score  --assoc A --ngrams N [--lemmas L] [--thesaurus T] [--resp R] [--by ATTR]
//   wassoc test   --assoc A --ngrams N --resp R [--by ATTR] [--iters K]
//   wassoc embed  --assoc A [--resp R --by ATTR] [--dim D --alpha a --shift k --eig-weight p ...]
//   wassoc nn     --model M1 [--model M2 ...] --query WORD [-n N]
//   wassoc report --assoc A [--resp R] [--lemmas L]

#include <iostream>

#include <CLI11.hpp>

#include "wassoc/app/commands.hpp"

namespace {

using wassoc::app::RunConfig;

void add_input_flags(CLI::App* cmd, RunConfig& config, std::optional<std::string>* paths) {
  cmd->add_option("--assoc", paths[0], "Associations TSV: respondent_id, stimulus, response");
  cmd->add_option("--resp", paths[1], "Respondents TSV: id, gender, specialization, age, location");
  cmd->add_option("--ngrams", paths[2], "Ngram frequency TSV: tokens, count");
  cmd->add_option("--lemmas", paths[3], "Lemma dictionary TSV: surface, lemma");
  cmd->add_option("--thesaurus", paths[4], "Thesaurus TSV: lemma_a, lemma_b, relation");
  cmd->add_option("--filter", config.filter, "Slice filter, e.g. gender=f,specialization=chemistry,age=18-26");
  cmd->add_option("--by", config.by, "Group by gender, specialization or location");
  cmd->add_option("--out", config.out, "Output directory")->capture_default_str();
  cmd->add_option("--format", config.format, "Report format")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, wassoc::app::ReportFormat>{{"json", wassoc::app::ReportFormat::json},
                                                           {"csv", wassoc::app::ReportFormat::csv}}));
  cmd->add_option("--seed", config.seed, "Seed for all randomness")->capture_default_str();
  cmd->add_flag("!--no-normalize", config.normalize, "Disable NFC + lowercase token normalization");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-association analysis: syntagmatic/paradigmatic scoring, demographic slicing, "
               "personalized PPMI-SVD models"};
  app.require_subcommand(1);

  RunConfig config;
  std::optional<std::string> paths[5];
  std::string mode = "symmetric";
  std::vector<std::string> models;

  auto* score = app.add_subcommand("score", "Syntagmatic and paradigmatic scores, optionally per slice");
  auto* test = app.add_subcommand("test", "Permutation test on per-respondent match rate between two groups");
  auto* embed = app.add_subcommand("embed", "Build PPMI-SVD models for the full set and per slice");
  auto* nn = app.add_subcommand("nn", "Nearest neighbours of a query across models");
  auto* report = app.add_subcommand("report", "Dataset summary and top responses");

  for (auto* cmd : {score, test, embed, report}) add_input_flags(cmd, config, paths);

  test->add_option("--iters", config.iterations, "Permutation iterations")->capture_default_str();

  embed->add_option("--dim", config.embed.dim, "Embedding dimension")->capture_default_str();
  embed->add_option("--alpha", config.embed.alpha, "Context distribution smoothing")->capture_default_str();
  embed->add_option("--shift", config.embed.shift, "PMI shift k (subtracts ln k)")->capture_default_str();
  embed->add_option("--eig-weight", config.embed.eig_weight, "Singular value exponent p")->capture_default_str();
  embed->add_option("--threshold", config.embed.threshold, "Minimum token total count")->capture_default_str();
  embed->add_option("--mode", mode, "symmetric or directional")->capture_default_str();

  nn->add_option("--model", models, "Model file (repeatable)")->required();
  nn->add_option("--query", config.query, "Query word")->required();
  nn->add_option("-n", config.top_n, "Neighbours per model")->capture_default_str();
  nn->add_flag("!--no-normalize", config.normalize, "Disable NFC + lowercase of the query");

  report->add_option("--top", config.top_k, "Number of top responses")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : wassoc::app::kExitInputError;
  }

  auto set_path = [](const std::optional<std::string>& s, std::optional<std::filesystem::path>& dst) {
    if (s) dst = *s;
  };
  set_path(paths[0], config.assoc);
  set_path(paths[1], config.respondents);
  set_path(paths[2], config.ngrams);
  set_path(paths[3], config.lemmas);
  set_path(paths[4], config.thesaurus);
  for (const auto& m : models) config.models.emplace_back(m);
  try {
    config.embed.mode = wassoc::parse_count_mode(mode);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return wassoc::app::kExitInputError;
  }

  if (*score) return wassoc::app::cmd_score(config, std::cout, std::cerr);
  if (*test) return wassoc::app::cmd_test(config, std::cout, std::cerr);
  if (*embed) return wassoc::app::cmd_embed(config, std::cout, std::cerr);
  if (*nn) return wassoc::app::cmd_nn(config, std::cout, std::cerr);
  return wassoc::app::cmd_report(config, std::cout, std::cerr);
}
