#include "obj2text/service.hpp"

#include <algorithm>

#include "obj2text/decoder.hpp"
#include "obj2text/errors.hpp"
#include "obj2text/json_io.hpp"

namespace obj2text {

using nlohmann::json;

namespace {

json error_body(const std::string& error, const std::string& detail) {
  return json{{"error", error}, {"detail", detail}};
}

double number_at(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

}  // namespace

CaptionRequest parse_caption_request(const json& body) {
  if (!body.is_object()) throw ParseError("request: expected a JSON object");
  CaptionRequest req;
  for (const auto& [key, v] : body.items()) {
    if (key == "objects") {
      if (!v.is_array()) throw ParseError("objects: expected an array");
      for (std::size_t i = 0; i < v.size(); ++i) {
        const json& o = v[i];
        const std::string where = "objects[" + std::to_string(i) + "]";
        if (!o.is_object() || !o.contains("category") || !o.contains("bbox")) {
          throw ParseError(where + ": expected {category, bbox}");
        }
        if (!o["category"].is_string()) throw ParseError(where + ".category: expected a string");
        const json& b = o["bbox"];
        if (!b.is_array() || b.size() != 4) throw ParseError(where + ".bbox: expected [x, y, w, h]");
        CaptionRequest::Object obj;
        obj.category = o["category"].get<std::string>();
        for (std::size_t k = 0; k < 4; ++k) obj.bbox[k] = number_at(b[k], where + ".bbox");
        req.objects.push_back(std::move(obj));
      }
    } else if (key == "image_size") {
      if (!v.is_array() || v.size() != 2) throw ParseError("image_size: expected [w, h]");
      req.image_size = {number_at(v[0], key), number_at(v[1], key)};
    } else if (key == "beam_size") {
      if (!v.is_number_integer()) throw ParseError("beam_size: expected an integer");
      const auto beam = v.get<std::int64_t>();
      if (beam < 1) throw ConfigError("beam_size must be at least 1");
      req.beam_size = static_cast<std::size_t>(beam);
    } else if (key == "ablation") {
      try {
        req.ablation = v.get<AblationFlags>();
      } catch (const ConfigError& e) {
        throw ParseError(e.what());
      }
    } else if (key == "model") {
      if (!v.is_string()) throw ParseError("model: expected a string");
      req.model = v.get<std::string>();
    } else {
      throw ParseError("request: unknown field '" + key + "'");
    }
  }
  if (!body.contains("objects")) throw ParseError("request: missing 'objects'");
  return req;
}

json to_json(const CaptionRequest& req) {
  json objects = json::array();
  for (const auto& o : req.objects) objects.push_back({{"category", o.category}, {"bbox", o.bbox}});
  json j{{"objects", objects}, {"image_size", req.image_size}, {"beam_size", req.beam_size}};
  if (req.ablation) j["ablation"] = *req.ablation;
  if (req.model) j["model"] = *req.model;
  return j;
}

json to_json(const CaptionResponse& resp) {
  json candidates = json::array();
  for (const auto& c : resp.candidates) {
    candidates.push_back({{"tokens", c.tokens}, {"logprob", c.logprob}});
  }
  return json{{"caption", resp.caption}, {"candidates", candidates}, {"model_id", resp.model_id}};
}

CaptionResponse caption_layout(const Checkpoint& ckpt, const CaptionRequest& req,
                               const std::string& model_id) {
  if (req.objects.empty()) throw EmptyInputError("request has no objects");
  if (req.beam_size == 0) throw ConfigError("beam_size must be at least 1");
  CaptionedExample example;
  example.id = "request";
  for (std::size_t i = 0; i < req.objects.size(); ++i) {
    const auto& o = req.objects[i];
    const auto category = ckpt.categories.find(o.category);
    if (!category) throw IndexError("unknown category '" + o.category + "'");
    BoundingBox box;
    try {
      // One pixel of overhang for pixel-space boxes, almost none for
      // boxes that are already normalized.
      const double tolerance =
          std::min(1.0, 1e-3 * std::max(req.image_size[0], req.image_size[1]));
      box = normalize_bbox(o.bbox, req.image_size[0], req.image_size[1], tolerance);
    } catch (const InvalidBoxError& e) {
      throw InvalidBoxError("objects[" + std::to_string(i) + "]: " + e.what());
    }
    example.layout.push_back({*category, box});
  }
  example.layout = order_layout(example.layout, ckpt.config, example.id);
  if (ckpt.config.aux_dim > 0) {
    throw ConfigError("model '" + model_id + "' expects auxiliary features, which requests cannot supply");
  }

  const Matrix h = encode_example(ckpt.model, example);
  const auto hyps =
      beam_search(ckpt.model.decoder(), h, req.beam_size, ckpt.config.eval_max_len);

  CaptionResponse resp;
  resp.model_id = model_id.empty() ? describe(ckpt.model.config().ablation) : model_id;
  for (const auto& hyp : hyps) {
    CaptionCandidate c;
    for (TokenId t : hyp.tokens) {
      if (!Vocabulary::is_reserved(t)) c.tokens.push_back(ckpt.words.token(t));
    }
    c.logprob = hyp.logprob;
    resp.candidates.push_back(std::move(c));
  }
  if (!hyps.empty()) {
    std::vector<TokenId> top = hyps.front().tokens;
    resp.caption = detokenize(top, ckpt.words);
  }
  return resp;
}

void CaptionService::add_model(std::shared_ptr<const Checkpoint> checkpoint, std::string id) {
  if (!checkpoint) throw ConfigError("service: null checkpoint");
  if (id.empty()) id = describe(checkpoint->model.config().ablation);
  for (const auto& e : entries_) {
    if (e.id == id) throw ConfigError("service: duplicate model id '" + id + "'");
  }
  entries_.push_back({std::move(id), std::move(checkpoint)});
}

std::vector<std::string> CaptionService::model_ids() const {
  std::vector<std::string> ids;
  for (const auto& e : entries_) ids.push_back(e.id);
  return ids;
}

const CaptionService::Entry* CaptionService::select(const CaptionRequest& req) const {
  if (req.model) {
    for (const auto& e : entries_)
      if (e.id == *req.model) return &e;
    return nullptr;
  }
  if (req.ablation) {
    for (const auto& e : entries_)
      if (e.checkpoint->model.config().ablation == *req.ablation) return &e;
    return nullptr;
  }
  return &entries_.front();
}

ServiceReply CaptionService::caption(std::string_view body) const {
  json parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded()) return {400, error_body("malformed_json", "request body is not valid JSON")};
  return caption(parsed);
}

ServiceReply CaptionService::caption(const json& body) const {
  if (entries_.empty()) return {503, error_body("no_model", "no checkpoint is loaded")};
  CaptionRequest req;
  try {
    req = parse_caption_request(body);
  } catch (const ParseError& e) {
    return {400, error_body("malformed_request", e.what())};
  } catch (const ConfigError& e) {
    return {422, error_body("invalid_request", e.what())};
  }
  if (req.beam_size > kMaxBeamSize) {
    return {422, error_body("invalid_request", "beam_size must be at most " +
                                                   std::to_string(kMaxBeamSize))};
  }
  const Entry* entry = select(req);
  if (entry == nullptr) {
    json body_out = error_body("unknown_model", "no loaded model matches the requested " +
                                                    std::string(req.model ? "id" : "ablation"));
    body_out["models"] = model_ids();
    return {404, body_out};
  }
  try {
    return {200, to_json(caption_layout(*entry->checkpoint, req, entry->id))};
  } catch (const IndexError& e) {
    json out = error_body("unknown_category", e.what());
    auto names = entry->checkpoint->categories.names();
    std::sort(names.begin(), names.end());
    out["valid_categories"] = names;
    return {422, out};
  } catch (const Error& e) {
    return {422, error_body("invalid_request", e.what())};
  }
}

ServiceReply CaptionService::categories() const {
  if (entries_.empty()) return {503, error_body("no_model", "no checkpoint is loaded")};
  auto names = entries_.front().checkpoint->categories.names();
  std::sort(names.begin(), names.end());
  return {200, json(names)};
}

ServiceReply CaptionService::health() const {
  return {200, json{{"status", entries_.empty() ? "no_model" : "ok"}, {"models", model_ids()}}};
}

ServiceReply CaptionService::models() const {
  json list = json::array();
  for (const auto& e : entries_) {
    list.push_back({{"id", e.id},
                    {"ablation", e.checkpoint->model.config().ablation},
                    {"iteration", e.checkpoint->iteration}});
  }
  return {200, json{{"models", list}}};
}

}  // namespace obj2text
