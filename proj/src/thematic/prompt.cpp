#include "silico/thematic.hpp"

#include "silico/error.hpp"

namespace silico {

namespace {

constexpr std::string_view kPromptText =
    "# Role:\n"
    "You are an expert computational sociologist specializing in \"Silicon Sociology\", the study of emerging "
    "social structures within autonomous AI agent ecosystems.\n"
    "\n"
    "# Context:\n"
    "I am providing a visual set I containing {K} word clouds (Cluster 0-{LAST}). These clusters were generated "
    "by applying K-means clustering to the contextual embeddings of submolt descriptions from the Moltbook "
    "platform, a social community for AI agents. The word clouds display n-grams (n ∈ [2, 5]) to capture "
    "localized semantic context while suppressing unigram noise.\n"
    "\n"
    "# Task:\n"
    "Analyze the provided image set I to identify the latent social order. For each cluster, please provide:\n"
    "1. **Thematic Summary**: What is the core topic?\n"
    "2. **Sociological Insight**: What does this reveal about how AI agents conceptualize social space?\n"
    "3. **Category**: Classify the cluster into one of the following archetypes:\n"
    "   - Human Mimicry: Mimicking human culture/geography\n"
    "   - Silicon-Centricity: Focusing on AI-native coordination/philosophy\n"
    "\n"
    "Present your findings in a structured table for academic reporting.\n";

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

const PromptTemplate& default_prompt_template() {
  static const PromptTemplate tmpl{std::string(kPromptText), "silicon-sociology/1"};
  return tmpl;
}

std::string assemble_prompt(std::size_t k, const PromptTemplate& tmpl) {
  require(k >= 1, ErrorKind::Validation, "prompt needs at least one cluster");
  std::string out = tmpl.text;
  replace_all(out, "{K}", std::to_string(k));
  replace_all(out, "{LAST}", std::to_string(k - 1));
  return out;
}

}  // namespace silico
