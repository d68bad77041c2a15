#include "wassoc/app/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "wassoc/app/report_writer.hpp"
#include "wassoc/scoring.hpp"

namespace wassoc::app {

ReportFormat parse_report_format(std::string_view token) {
  if (token == "json") return ReportFormat::json;
  if (token == "csv") return ReportFormat::csv;
  throw Error("unknown report format \"" + std::string(token) + "\" (expected json or csv)");
}

std::string model_file_label(std::string_view label) {
  std::string out;
  for (unsigned char c : label) {
    bool unsafe = c < 0x20 || c == ' ' || c == '/' || c == '\\' || c == ':' || c == '*' || c == '?' ||
                  c == '"' || c == '<' || c == '>' || c == '|' || c == 0x7F;
    out += unsafe ? '_' : static_cast<char>(c);
  }
  return out.empty() ? "_" : out;
}

namespace {

// Input stores shared by the subcommands.
struct Inputs {
  AssociationSet assoc;
  std::optional<RespondentTable> respondents;
  std::optional<NgramTable> ngrams;
  LemmaDictionary lemmas;
  std::optional<ThesaurusIndex> thesaurus;
};

void require(const std::optional<std::filesystem::path>& path, const char* flag) {
  if (!path) throw Error(std::string("missing required option ") + flag);
}

void check_exists(const std::optional<std::filesystem::path>& path) {
  if (path && !std::filesystem::exists(*path)) throw LoadError(path->string(), 0, "no such file");
}

Inputs load_inputs(const RunConfig& config) {
  for (const auto* p : {&config.assoc, &config.respondents, &config.ngrams, &config.lemmas, &config.thesaurus}) {
    check_exists(*p);
  }
  LoadOptions options{config.normalize};
  Inputs in;
  if (config.respondents) in.respondents = load_respondents(*config.respondents);
  if (config.assoc) in.assoc = load_associations(*config.assoc, nullptr, options);
  if (config.ngrams) in.ngrams = load_ngram_table(*config.ngrams, options);
  if (config.lemmas) in.lemmas = load_lemma_dict(*config.lemmas, options);
  if (config.thesaurus) in.thesaurus = load_thesaurus(*config.thesaurus, options);
  return in;
}

std::optional<Attribute> grouping(const RunConfig& config) {
  if (config.by.empty() || config.by == "all") return std::nullopt;
  return parse_attribute(config.by);
}

const RespondentTable& need_respondents(const Inputs& in, const char* why) {
  if (!in.respondents) throw Error(std::string("--resp is required ") + why);
  return *in.respondents;
}

AssociationSet apply_filter(const RunConfig& config, const Inputs& in) {
  SliceSpec spec = SliceSpec::parse(config.filter);
  if (spec.is_universal()) return in.assoc;
  AssociationSet out = slice(in.assoc, need_respondents(in, "for --filter"), spec);
  if (out.empty()) throw DegenerateDataError("no associations left after --filter " + config.filter);
  return out;
}

void prepare_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

// Maps library exceptions onto exit codes.
template <typename Body>
int run_guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const DegenerateDataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

// ---------------------------------------------------------------------------
// score

struct RecordMetrics {
  RecordMetric matched_pct;
  RecordMetric log_contribution;
  std::optional<RecordMetric> classified_pct;
};

RecordMetrics make_metrics(const Inputs& in) {
  RecordMetrics m;
  const NgramTable& table = *in.ngrams;
  const LemmaDictionary& dict = in.lemmas;
  m.matched_pct = [&](const AssociationRecord& r) {
    return match_frequency(r, table, dict).matched_frequency > 0 ? 100.0 : 0.0;
  };
  m.log_contribution = [&](const AssociationRecord& r) { return match_frequency(r, table, dict).log_contribution; };
  if (in.thesaurus) {
    const ThesaurusIndex& thesaurus = *in.thesaurus;
    m.classified_pct = [&](const AssociationRecord& r) {
      return classify_relation(r, thesaurus, dict).empty() ? 0.0 : 100.0;
    };
  }
  return m;
}

// Half-sum of the male and female per-respondent means; falls back to the
// plain per-respondent mean when a gender is absent from the set.
std::pair<double, bool> normalized_value(const AssociationSet& set, const RespondentTable& table,
                                         const RecordMetric& metric) {
  auto by_gender = per_respondent_metric(set, table, metric, Attribute::gender);
  try {
    return {gender_normalized(by_gender), true};
  } catch (const DegenerateDataError&) {
    auto means = respondent_means(set, metric);
    double sum = 0.0;
    for (const auto& [id, v] : means) sum += v;
    return {sum / static_cast<double>(means.size()), false};
  }
}

nlohmann::json slice_metrics(const AssociationSet& set, const Inputs& in, const RecordMetrics& metrics) {
  nlohmann::json j;
  j["score"] = syntagmatic_score(set, *in.ngrams, in.lemmas);
  if (in.thesaurus) j["relations"] = relation_profile(set, *in.thesaurus, in.lemmas);
  if (in.respondents) {
    for (const auto& r : set) in.respondents->at(r.respondent_id);
    std::set<std::string> ids;
    for (const auto& r : set) ids.insert(r.respondent_id);
    j["respondents"] = ids.size();

    nlohmann::json norm;
    auto [rate, from_genders] = normalized_value(set, *in.respondents, metrics.matched_pct);
    norm["match_rate_pct"] = rate;
    norm["mean_log"] = normalized_value(set, *in.respondents, metrics.log_contribution).first;
    if (metrics.classified_pct) {
      norm["paradigmatic_pct"] = normalized_value(set, *in.respondents, *metrics.classified_pct).first;
    }
    norm["from_genders"] = from_genders;
    j["gender_normalized"] = norm;
  }
  return j;
}

// ---------------------------------------------------------------------------
// nn

std::string model_label(const std::filesystem::path& path) {
  std::string stem = path.stem().string();
  if (stem.rfind("model_", 0) == 0 && stem.size() > 6) stem = stem.substr(6);
  return stem;
}

std::string pad(const std::string& s, std::size_t width) {
  std::size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

}  // namespace

int cmd_score(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    require(config.assoc, "--assoc");
    require(config.ngrams, "--ngrams");
    Inputs in = load_inputs(config);
    std::optional<Attribute> by = grouping(config);
    if (by) need_respondents(in, "for --by");
    prepare_output_dir(config.out);

    AssociationSet set = apply_filter(config, in);
    if (set.empty()) throw DegenerateDataError("association set is empty");
    RecordMetrics metrics = make_metrics(in);

    Report report;
    report.meta["records"] = set.size();
    report.meta["log_base"] = "e";
    if (!config.filter.empty()) report.meta["filter"] = config.filter;
    report.rows.push_back({"global", "all", slice_metrics(set, in, metrics)});

    if (by) {
      std::map<std::string, std::vector<std::size_t>> groups;
      for (std::size_t i = 0; i < set.size(); ++i) {
        auto label = attribute_label(in.respondents->at(set[i].respondent_id), *by);
        if (label) groups[*label].push_back(i);
      }
      report.meta["by"] = std::string(to_string(*by));
      for (const auto& [label, indices] : groups) {
        AssociationSet subset;
        for (std::size_t i : indices) subset.add(set[i]);
        report.rows.push_back({std::string(to_string(*by)), label, slice_metrics(subset, in, metrics)});
      }
    }

    auto path = write_report(config.out, "score", report, config.format);
    const auto& global = report.rows.front().metrics["score"];
    out << "matched " << global["matched"].get<std::size_t>() << " of " << global["total"].get<std::size_t>()
        << " responses (" << std::fixed << std::setprecision(2) << global["match_rate_pct"].get<double>()
        << "%), S = " << std::setprecision(6) << global["s"].get<double>() << '\n';
    out.unsetf(std::ios::floatfield);
    out << "wrote " << path.string() << '\n';
    return kExitOk;
  });
}

int cmd_test(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    require(config.assoc, "--assoc");
    require(config.ngrams, "--ngrams");
    require(config.respondents, "--resp");
    if (config.iterations == 0) throw Error("--iters must be positive");
    Inputs in = load_inputs(config);
    Attribute attribute = grouping(config).value_or(Attribute::gender);
    prepare_output_dir(config.out);

    AssociationSet set = apply_filter(config, in);
    if (set.empty()) throw DegenerateDataError("association set is empty");
    RecordMetrics metrics = make_metrics(in);
    auto groups = per_respondent_metric(set, *in.respondents, metrics.matched_pct, attribute);
    if (groups.size() < 2) {
      throw DegenerateDataError("attribute " + std::string(to_string(attribute)) + " has " +
                                std::to_string(groups.size()) + " group(s); need at least 2");
    }

    std::vector<const GroupStats*> ranked;
    for (const auto& [label, g] : groups) ranked.push_back(&g);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const GroupStats* a, const GroupStats* b) { return a->count > b->count; });
    const GroupStats& a = *ranked[0];
    const GroupStats& b = *ranked[1];
    const double statistic = a.mean - b.mean;
    const double p = permutation_test(a.values, b.values, config.iterations, config.seed);

    Report report;
    report.meta["attribute"] = std::string(to_string(attribute));
    report.meta["metric"] = "per-respondent match rate (%)";
    report.meta["iterations"] = config.iterations;
    report.meta["seed"] = config.seed;
    for (const GroupStats* g : {&a, &b}) {
      report.rows.push_back({std::string(to_string(attribute)), g->label, {{"respondents", g->count}, {"mean", g->mean}}});
    }
    report.rows.push_back({"test", a.label + " vs " + b.label, {{"statistic", statistic}, {"p_value", p}}});
    auto path = write_report(config.out, "test", report, config.format);

    out << std::string(to_string(attribute)) << ": " << a.label << " (n=" << a.count << ", mean=" << a.mean << ") vs "
        << b.label << " (n=" << b.count << ", mean=" << b.mean << ")\n";
    out << "statistic " << statistic << "  p-value " << p << "  iterations " << config.iterations << "  seed "
        << config.seed << '\n';
    out << "wrote " << path.string() << '\n';
    return kExitOk;
  });
}

int cmd_embed(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    require(config.assoc, "--assoc");
    EmbeddingConfig ec = config.embed;
    ec.seed = config.seed;
    ec.validate();
    Inputs in = load_inputs(config);
    std::optional<Attribute> by = grouping(config);
    if (by) need_respondents(in, "for --by");
    prepare_output_dir(config.out);
    AssociationSet set = apply_filter(config, in);

    auto save = [&](const std::string& label, const EmbeddingSpace& space) {
      std::filesystem::path path = config.out / ("model_" + model_file_label(label) + ".txt");
      std::ofstream f(path, std::ios::binary | std::ios::trunc);
      if (!f) throw Error("cannot write " + path.string());
      space.save(f);
      out << "wrote " << path.string() << " (" << space.size() << " words, dim " << space.dim() << ")\n";
    };

    if (!by) {
      save("all", build_space(set, in.lemmas, ec));
      return kExitOk;
    }
    PersonalizedModels models = build_personalized_models(set, *in.respondents, *by, in.lemmas, ec);
    save("all", models.baseline);
    for (const auto& [label, space] : models.models) save(label, space);
    for (const auto& w : models.warnings) err << "warning: " << w << '\n';
    for (const auto& [label, reason] : models.skipped) {
      err << "warning: skipped " << to_string(*by) << "=" << label << ": " << reason << '\n';
    }
    return kExitOk;
  });
}

int cmd_nn(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    if (config.models.empty()) throw Error("missing required option --model");
    if (config.query.empty()) throw Error("missing required option --query");
    if (config.top_n == 0) throw Error("-n must be positive");
    std::string query = config.normalize ? normalize_token(config.query) : config.query;

    std::vector<std::string> headers;
    std::vector<std::optional<NeighborList>> columns;
    for (const auto& path : config.models) {
      std::ifstream f(path, std::ios::binary);
      if (!f) throw LoadError(path.string(), 0, "cannot open model");
      EmbeddingSpace space;
      try {
        space = EmbeddingSpace::load(f);
      } catch (const LoadError&) {
        throw;
      } catch (const Error& e) {
        throw LoadError(path.string(), 0, e.what());
      }
      headers.push_back(model_label(path));
      if (space.contains(query)) {
        columns.emplace_back(nearest_neighbors(space, query, config.top_n));
      } else {
        columns.emplace_back(std::nullopt);
      }
    }
    if (std::none_of(columns.begin(), columns.end(), [](const auto& c) { return c.has_value(); })) {
      throw DegenerateDataError("\"" + query + "\" is out of vocabulary in every model");
    }

    std::size_t rows = 0;
    for (const auto& c : columns) {
      if (c) rows = std::max(rows, c->size());
    }
    std::vector<std::vector<std::string>> cells(columns.size(), std::vector<std::string>(rows));
    for (std::size_t j = 0; j < columns.size(); ++j) {
      for (std::size_t i = 0; i < rows; ++i) {
        if (!columns[j]) {
          cells[j][i] = "—";
        } else if (i < columns[j]->size()) {
          char sim[32];
          std::snprintf(sim, sizeof sim, "%.4f", (*columns[j])[i].similarity);
          cells[j][i] = (*columns[j])[i].word + " (" + sim + ")";
        }
      }
    }
    std::vector<std::size_t> widths(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      widths[j] = display_width(headers[j]);
      for (const auto& c : cells[j]) widths[j] = std::max(widths[j], display_width(c));
    }
    auto emit = [&](auto cell_at) {
      std::string line;
      for (std::size_t j = 0; j < columns.size(); ++j) {
        if (j > 0) line += " | ";
        line += j + 1 == columns.size() ? cell_at(j) : pad(cell_at(j), widths[j]);
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out << line << '\n';
    };
    out << "query: " << query << '\n';
    emit([&](std::size_t j) { return headers[j]; });
    emit([&](std::size_t j) {
      return std::string(widths[j], '-');
    });
    for (std::size_t i = 0; i < rows; ++i) emit([&](std::size_t j) { return cells[j][i]; });
    return kExitOk;
  });
}

int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    require(config.assoc, "--assoc");
    Inputs in = load_inputs(config);
    prepare_output_dir(config.out);
    AssociationSet set = apply_filter(config, in);

    std::set<std::string> respondents, stimuli, stimulus_lemmas, responses, response_lemmas;
    std::map<std::string, std::size_t> response_counts;
    for (const auto& r : set) {
      respondents.insert(r.respondent_id);
      stimuli.insert(r.stimulus);
      stimulus_lemmas.insert(in.lemmas.lemmatize(r.stimulus));
      responses.insert(r.response);
      response_lemmas.insert(in.lemmas.lemmatize_phrase(r.response));
      ++response_counts[r.response];
    }

    Report report;
    report.meta["records"] = set.size();
    report.meta["questionnaires"] = respondents.size();
    report.meta["distinct_stimuli"] = stimuli.size();
    report.meta["distinct_stimulus_lemmas"] = stimulus_lemmas.size();
    report.meta["distinct_responses"] = responses.size();
    report.meta["distinct_response_lemmas"] = response_lemmas.size();

    std::vector<std::pair<std::string, std::size_t>> ranked(response_counts.begin(), response_counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    const std::size_t k = std::min(config.top_k, ranked.size());
    for (std::size_t i = 0; i < k; ++i) {
      report.rows.push_back({"top_responses", ranked[i].first, {{"rank", i + 1}, {"count", ranked[i].second}}});
    }

    if (in.respondents) {
      std::size_t unresolved = 0;
      std::map<std::string, std::map<std::string, std::size_t>> by_attribute;
      for (const auto& id : respondents) {
        const Respondent* r = in.respondents->find(id);
        if (r == nullptr) {
          ++unresolved;
          continue;
        }
        for (Attribute a : {Attribute::gender, Attribute::specialization, Attribute::location}) {
          ++by_attribute[std::string(to_string(a))][attribute_label(*r, a).value_or("(none)")];
        }
      }
      report.meta["unresolved_respondents"] = unresolved;
      for (const auto& [attribute, counts] : by_attribute) {
        for (const auto& [label, n] : counts) {
          report.rows.push_back({"respondents_by_" + attribute, label, {{"count", n}}});
        }
      }
    }

    auto path = write_report(config.out, "report", report, config.format);
    out << "questionnaires " << respondents.size() << ", records " << set.size() << ", stimuli " << stimuli.size()
        << ", responses " << responses.size() << " (" << response_lemmas.size() << " lemmas)\n";
    for (std::size_t i = 0; i < k; ++i) out << std::setw(3) << i + 1 << ". " << ranked[i].first << ' ' << ranked[i].second << '\n';
    out << "wrote " << path.string() << '\n';
    return kExitOk;
  });
}

}  // namespace wassoc::app
