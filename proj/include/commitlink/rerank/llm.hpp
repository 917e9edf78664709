#pragma once

#include "commitlink/common/http.hpp"
#include "commitlink/retrieval/ranked_list.hpp"

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace commitlink::rerank {

/// Bumped whenever the prompt wording changes.
inline constexpr int kPromptTemplateVersion = 1;
inline constexpr std::size_t kDefaultMessageBudget = 1000;

struct LlmCandidate {
    std::string doc_id;
    std::string message;
};

/// One issue and its candidates in retrieval order.
struct RerankRequestBatch {
    std::string query_id;
    std::string issue_title;
    std::string issue_description;
    std::vector<LlmCandidate> candidates;
};

struct RenderedPrompt {
    std::string text;
    std::size_t truncated_messages = 0;
};

std::string_view prompt_template();

/// Fills the template; each commit message is cut to `message_budget` bytes
/// (on a UTF-8 boundary).
RenderedPrompt render_prompt(const RerankRequestBatch& batch, std::size_t message_budget = kDefaultMessageBudget);

/// Candidate ids in the order the model mentions them. Words made of
/// [A-Za-z0-9_-] match a candidate when equal to its id or, with at least 7
/// characters, a prefix of exactly one id (case-insensitive). Repeats are
/// dropped and unmentioned candidates follow in their original order, so the
/// result is always a permutation of `candidate_ids`.
std::vector<std::string> parse_llm_order(std::string_view raw, std::span<const std::string> candidate_ids);

/// Chat-completions client: POST {model, messages: [{role, content}]}.
class ChatClient {
public:
    ChatClient(EndpointConfig endpoint, std::string model);
    virtual ~ChatClient() = default;

    /// Text of the first choice. Throws RemoteError after retries.
    virtual std::string complete(const std::string& prompt);

    const std::string& model() const { return model_; }

protected:
    ChatClient() = default;

private:
    std::unique_ptr<JsonEndpoint> endpoint_;
    std::string model_;
};

struct LlmRerankResult {
    retrieval::RankedList list;
    bool fallback = false;
    std::size_t truncated_messages = 0;
    std::string error;
};

/// Renders the prompt, asks the model and parses its order. Scores are
/// synthetic: n for the first position down to 1 for the last. On a remote
/// failure the retrieval order is returned and `fallback` set.
LlmRerankResult llm_rerank(ChatClient& client, const RerankRequestBatch& batch, std::string provenance = "llm",
                           std::size_t message_budget = kDefaultMessageBudget);

} // namespace commitlink::rerank
