#pragma once

#include "commitlink/common/http.hpp"

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace commitlink::rerank {

using TextPair = std::pair<std::string, std::string>;  ///< (query, document)

/// Pairwise relevance endpoint: POST {"pairs": [[q, d], ...]} ->
/// {"scores": [...]}; higher means more relevant.
class PairwiseClient {
public:
    explicit PairwiseClient(EndpointConfig endpoint);
    virtual ~PairwiseClient() = default;

    /// One score per pair, in request order. Throws RemoteError after retries
    /// or when the response is malformed.
    virtual std::vector<double> score(std::span<const TextPair> pairs);

protected:
    PairwiseClient() = default;

private:
    std::unique_ptr<JsonEndpoint> endpoint_;
};

double external_score(PairwiseClient& client, const std::string& issue_text, const std::string& commit_text);

} // namespace commitlink::rerank
