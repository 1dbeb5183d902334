#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "itopics/stance.hpp"
#include "itopics/topicmodel.hpp"

namespace itopics {

enum class Stage { ingest, stance, homophily, lda, graph, report };

inline constexpr Stage kAllStages[] = {Stage::ingest, Stage::stance, Stage::homophily,
                                       Stage::lda,    Stage::graph,  Stage::report};

std::string_view to_string(Stage stage) noexcept;
std::optional<Stage> parse_stage(std::string_view name) noexcept;
std::vector<Stage> stage_dependencies(Stage stage);

struct PipelineConfig {
  std::filesystem::path tweets;
  std::filesystem::path knowledge_base;
  std::optional<std::filesystem::path> gazetteer;
  std::string issue;  // defaults to the first issue of the knowledge base
  std::optional<TendencyAxis> axis;  // defaults to the issue's first two stances
  bool include_replies = false;
  std::uint32_t min_doc_freq = 5;
  std::uint64_t max_degree = 2000;
  double epsilon = 0.05;
  LdaConfig lda;
  // Expected partner-stance proportions for the homophily test; defaults to
  // the predicted label proportions over all profiled users.
  std::optional<std::map<std::string, double, std::less<>>> population;

  // Relative paths are resolved against the config file's directory.
  // Throws ConfigError.
  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig from_json(std::string_view json_text, const std::filesystem::path& base_dir = {});
  void validate() const;
};

struct StageOutcome {
  Stage stage = Stage::ingest;
  bool up_to_date = false;
  double seconds = 0.0;
  std::vector<std::string> messages;
};

// Runs stages against a workspace directory. Every stage writes its artifacts
// under <workspace>/<stage>/ together with manifest.json (input hashes,
// config echo, fingerprint, timing). A stage whose fingerprint and outputs
// are unchanged is skipped.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::filesystem::path workspace);

  // Throws MissingDependency when an upstream stage has no valid manifest,
  // ConfigError / PipelineError otherwise.
  StageOutcome run(Stage stage, bool force = false);
  std::vector<StageOutcome> run_all(bool force = false);

  const std::filesystem::path& workspace() const noexcept { return workspace_; }
  std::filesystem::path stage_dir(Stage stage) const;

 private:
  std::string fingerprint(Stage stage) const;
  bool is_current(Stage stage, const std::string& fingerprint) const;
  void write_manifest(Stage stage, const std::string& fingerprint, double seconds) const;
  std::optional<std::string> recorded_fingerprint(Stage stage) const;

  void run_ingest(StageOutcome& out);
  void run_stance(StageOutcome& out);
  void run_homophily(StageOutcome& out);
  void run_lda(StageOutcome& out);
  void run_graph(StageOutcome& out);
  void run_report(StageOutcome& out);

  PipelineConfig config_;
  std::filesystem::path workspace_;
};

// FNV-1a 64 of a file's bytes, hex encoded.
std::string hash_file(const std::filesystem::path& path);
std::string hash_string(std::string_view data);

}  // namespace itopics
