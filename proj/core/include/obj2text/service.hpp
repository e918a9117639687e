#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "obj2text/checkpoint.hpp"

namespace obj2text {

struct CaptionRequest {
  struct Object {
    std::string category;
    std::array<double, 4> bbox{};
  };
  std::vector<Object> objects;
  /// [1, 1] means the boxes are already normalized.
  std::array<double, 2> image_size{1.0, 1.0};
  std::size_t beam_size = 2;
  /// Selects a loaded model by its ablation flags.
  std::optional<AblationFlags> ablation;
  /// Selects a loaded model by id; takes precedence over `ablation`.
  std::optional<std::string> model;
};

struct CaptionCandidate {
  std::vector<std::string> tokens;
  double logprob = 0.0;
};

struct CaptionResponse {
  std::string caption;
  std::vector<CaptionCandidate> candidates;
  std::string model_id;
};

/// Structural parse of a request body. Throws ParseError for anything that is
/// not shaped like a request.
CaptionRequest parse_caption_request(const nlohmann::json& body);
nlohmann::json to_json(const CaptionRequest& request);
nlohmann::json to_json(const CaptionResponse& response);

/// Normalizes, maps and orders the request objects the way the checkpoint was
/// trained, then runs beam search. Shared by the CLI and the HTTP server so
/// both produce the same captions. Throws IndexError for an unknown category
/// and InvalidBoxError / EmptyInputError / ConfigError for invalid input.
CaptionResponse caption_layout(const Checkpoint& checkpoint, const CaptionRequest& request,
                               const std::string& model_id = "");

/// Status code plus JSON body, independent of any HTTP library.
struct ServiceReply {
  int status = 200;
  nlohmann::json body;
};

/// Stateless request handling over immutable, shared checkpoints. Every
/// method is const and safe to call from concurrent threads.
class CaptionService {
 public:
  /// Beam sizes above this are rejected to bound per-request memory.
  static constexpr std::size_t kMaxBeamSize = 32;

  /// Registers a model; the first one added answers requests that do not
  /// select a model. The id defaults to the ablation name ("full", ...).
  void add_model(std::shared_ptr<const Checkpoint> checkpoint, std::string id = "");

  std::vector<std::string> model_ids() const;

  /// POST /caption. 400 for malformed JSON or request structure, 422 for
  /// semantic validation failures (unknown category, invalid box, ...), 404
  /// for an unknown model.
  ServiceReply caption(std::string_view body) const;
  ServiceReply caption(const nlohmann::json& body) const;

  /// GET /categories: JSON array of the default model's category names, sorted.
  ServiceReply categories() const;
  /// GET /health
  ServiceReply health() const;
  /// GET /models
  ServiceReply models() const;

 private:
  struct Entry {
    std::string id;
    std::shared_ptr<const Checkpoint> checkpoint;
  };
  const Entry* select(const CaptionRequest& request) const;

  std::vector<Entry> entries_;
};

}  // namespace obj2text
