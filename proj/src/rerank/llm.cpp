#include "commitlink/rerank/llm.hpp"

#include "commitlink/common/errors.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <optional>

namespace commitlink::rerank {

namespace {

constexpr std::string_view kTemplate =
    "You are given a software issue and a list of candidate commits.\n"
    "Re-rank the commits according to their relevance to the issue, most relevant first.\n"
    "Return only the list of ordered commit ids, one per line, with no explanation.\n"
    "\n"
    "Issue title: {title}\n"
    "Issue description:\n"
    "{description}\n"
    "\n"
    "Commits:\n"
    "{commits}";

constexpr std::size_t kMinPrefix = 7;

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

bool id_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '-';
}

std::string truncate_utf8(const std::string& s, std::size_t budget, bool& truncated) {
    truncated = s.size() > budget;
    if (!truncated) {
        return s;
    }
    auto cut = budget;
    while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) {
        --cut;
    }
    return s.substr(0, cut);
}

} // namespace

std::string_view prompt_template() { return kTemplate; }

RenderedPrompt render_prompt(const RerankRequestBatch& batch, std::size_t message_budget) {
    RenderedPrompt out;
    std::string commits;
    for (const auto& c : batch.candidates) {
        bool truncated = false;
        commits += "id: " + c.doc_id + "\nmessage: " + truncate_utf8(c.message, message_budget, truncated) + "\n\n";
        out.truncated_messages += truncated ? 1 : 0;
    }
    // Substitute one placeholder at a time, in template order, so braces in
    // user text are never re-expanded.
    std::string text(kTemplate);
    const auto title_at = text.find("{title}");
    text.replace(title_at, 7, batch.issue_title);
    const auto desc_at = text.find("{description}", title_at + batch.issue_title.size());
    text.replace(desc_at, 13, batch.issue_description);
    const auto commits_at = text.find("{commits}", desc_at + batch.issue_description.size());
    text.replace(commits_at, 9, commits);
    out.text = std::move(text);
    return out;
}

std::vector<std::string> parse_llm_order(std::string_view raw, std::span<const std::string> candidate_ids) {
    std::vector<std::string> lowered;
    lowered.reserve(candidate_ids.size());
    for (const auto& id : candidate_ids) {
        lowered.push_back(lower(id));
    }
    std::vector<bool> used(candidate_ids.size(), false);
    std::vector<std::string> order;
    order.reserve(candidate_ids.size());

    auto resolve = [&](const std::string& word) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < lowered.size(); ++i) {
            if (lowered[i] == word) {
                return i;
            }
        }
        if (word.size() < kMinPrefix) {
            return std::nullopt;
        }
        std::optional<std::size_t> hit;
        for (std::size_t i = 0; i < lowered.size(); ++i) {
            if (lowered[i].size() > word.size() && lowered[i].compare(0, word.size(), word) == 0) {
                if (hit) {
                    return std::nullopt;  // ambiguous prefix
                }
                hit = i;
            }
        }
        return hit;
    };

    std::size_t pos = 0;
    while (pos < raw.size()) {
        if (!id_char(raw[pos])) {
            ++pos;
            continue;
        }
        auto end = pos;
        while (end < raw.size() && id_char(raw[end])) {
            ++end;
        }
        if (const auto i = resolve(lower(raw.substr(pos, end - pos))); i && !used[*i]) {
            used[*i] = true;
            order.push_back(candidate_ids[*i]);
        }
        pos = end;
    }
    for (std::size_t i = 0; i < candidate_ids.size(); ++i) {
        if (!used[i]) {
            order.push_back(candidate_ids[i]);
        }
    }
    return order;
}

ChatClient::ChatClient(EndpointConfig endpoint, std::string model)
    : endpoint_(std::make_unique<JsonEndpoint>(std::move(endpoint))), model_(std::move(model)) {}

std::string ChatClient::complete(const std::string& prompt) {
    if (!endpoint_) {
        throw RemoteError("chat client has no endpoint");
    }
    const nlohmann::json body{{"model", model_},
                              {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
                              {"temperature", 0}};
    const auto response = endpoint_->post(body);
    try {
        if (response.contains("choices") && !response["choices"].empty()) {
            const auto& choice = response["choices"][0];
            if (choice.contains("message") && choice["message"].contains("content")) {
                return choice["message"]["content"].get<std::string>();
            }
            if (choice.contains("text")) {
                return choice["text"].get<std::string>();
            }
        }
        if (response.contains("text")) {
            return response["text"].get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw RemoteError(std::string("chat response has an unexpected shape: ") + e.what());
    }
    throw RemoteError("chat response has no text field");
}

LlmRerankResult llm_rerank(ChatClient& client, const RerankRequestBatch& batch, std::string provenance,
                           std::size_t message_budget) {
    LlmRerankResult result;
    result.list.query_id = batch.query_id;
    result.list.provenance = std::move(provenance);
    std::vector<std::string> ids;
    ids.reserve(batch.candidates.size());
    for (const auto& c : batch.candidates) {
        ids.push_back(c.doc_id);
    }
    std::vector<std::string> order;
    if (ids.empty()) {
        return result;
    }
    const auto prompt = render_prompt(batch, message_budget);
    result.truncated_messages = prompt.truncated_messages;
    if (prompt.truncated_messages > 0) {
        spdlog::debug("{}: truncated {} commit messages in prompt", batch.query_id, prompt.truncated_messages);
    }
    try {
        order = parse_llm_order(client.complete(prompt.text), ids);
    } catch (const std::exception& e) {
        spdlog::warn("llm rerank failed for {}: {}; keeping retrieval order", batch.query_id, e.what());
        result.fallback = true;
        result.error = e.what();
        order = ids;
    }
    const auto n = order.size();
    for (std::size_t i = 0; i < n; ++i) {
        result.list.entries.push_back({order[i], static_cast<double>(n - i)});
    }
    return result;
}

} // namespace commitlink::rerank
