#pragma once

#include <string>
#include <vector>

#include "agora/acp/acp.hpp"

namespace agora::testkit {

struct CorpusCase {
    std::string name;
    std::string raw;
    ErrorCode expected;
};

/// Malformed and adversarial responses for agent A1 of a live Shape Factory
/// session in which H1 has sent A1 offer S123-001 and A1 has sent H1 offer
/// S123-002 (see acp_corpus_session). Every case must fail with `expected`.
std::vector<CorpusCase> acp_fuzz_corpus(std::uint64_t seed = 1);

/// The session the corpus is written against.
engine::SessionState acp_corpus_session(const controls::InteractionControls& c = {});

}  // namespace agora::testkit
