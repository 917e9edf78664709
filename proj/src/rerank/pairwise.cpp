#include "commitlink/rerank/pairwise.hpp"

#include "commitlink/common/errors.hpp"

#include <cmath>

namespace commitlink::rerank {

PairwiseClient::PairwiseClient(EndpointConfig endpoint)
    : endpoint_(std::make_unique<JsonEndpoint>(std::move(endpoint))) {}

std::vector<double> PairwiseClient::score(std::span<const TextPair> pairs) {
    if (!endpoint_) {
        throw RemoteError("pairwise client has no endpoint");
    }
    if (pairs.empty()) {
        return {};
    }
    nlohmann::json body{{"pairs", nlohmann::json::array()}};
    for (const auto& [q, d] : pairs) {
        body["pairs"].push_back({q, d});
    }
    const auto response = endpoint_->post(body);
    std::vector<double> scores;
    try {
        scores = response.at("scores").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw RemoteError(std::string("pairwise response has no numeric scores: ") + e.what());
    }
    if (scores.size() != pairs.size()) {
        throw RemoteError("pairwise endpoint returned " + std::to_string(scores.size()) + " scores for " +
                          std::to_string(pairs.size()) + " pairs");
    }
    for (const auto s : scores) {
        if (!std::isfinite(s)) {
            throw RemoteError("pairwise endpoint returned a non-finite score");
        }
    }
    return scores;
}

double external_score(PairwiseClient& client, const std::string& issue_text, const std::string& commit_text) {
    const TextPair pair{issue_text, commit_text};
    return client.score(std::span(&pair, 1)).front();
}

} // namespace commitlink::rerank
