#pragma once

#include <stdexcept>
#include <string>

namespace itopics {

// Input files or configuration that cannot be used as given (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A data-dependent failure inside a pipeline step (empty vocabulary,
// stance without seeds, singular Laplacian, ...).
class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A stage was requested before the stage it depends on has produced its
// artifacts (CLI exit code 2).
class MissingDependency : public std::runtime_error {
 public:
  explicit MissingDependency(std::string stage)
      : std::runtime_error("missing dependency: run stage '" + stage + "' first"),
        stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace itopics
