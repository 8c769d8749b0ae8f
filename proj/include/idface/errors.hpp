#pragma once

#include <stdexcept>
#include <string>

namespace idface {

// Exit codes used by the CLI; library errors carry the code they map to.
enum class ExitCode : int {
    ok = 0,
    config_error = 2,
    data_error = 3,
    numerical_divergence = 4,
    sampling_exhausted = 5,
};

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg, ExitCode code = ExitCode::data_error)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)), code_(code) {}

    const std::string& kind() const { return kind_; }
    ExitCode exit_code() const { return code_; }

private:
    std::string kind_;
    ExitCode code_;
};

inline Error zero_vector_error(const std::string& msg) {
    return Error("ZeroVector", msg, ExitCode::data_error);
}
inline Error empty_input_error(const std::string& msg) {
    return Error("EmptyInput", msg, ExitCode::data_error);
}
inline Error insufficient_data_error(const std::string& msg) {
    return Error("InsufficientData", msg, ExitCode::data_error);
}
inline Error component_out_of_range_error(const std::string& msg) {
    return Error("ComponentOutOfRange", msg, ExitCode::config_error);
}
inline Error sampling_exhausted_error(const std::string& msg) {
    return Error("SamplingExhausted", msg, ExitCode::sampling_exhausted);
}
inline Error empty_corpus_error(const std::string& msg) {
    return Error("EmptyCorpus", msg, ExitCode::data_error);
}
inline Error timestep_out_of_range_error(const std::string& msg) {
    return Error("TimestepOutOfRange", msg, ExitCode::config_error);
}
inline Error non_finite_output_error(const std::string& msg) {
    return Error("NonFiniteOutput", msg, ExitCode::numerical_divergence);
}
inline Error non_finite_loss_error(const std::string& msg) {
    return Error("NonFiniteLoss", msg, ExitCode::numerical_divergence);
}
inline Error missing_embedding_error(const std::string& msg) {
    return Error("MissingEmbedding", msg, ExitCode::data_error);
}
inline Error distance_function_error(const std::string& msg) {
    return Error("DistanceFunctionFailure", msg, ExitCode::data_error);
}
inline Error inconsistent_param_length_error(const std::string& msg) {
    return Error("InconsistentParamLength", msg, ExitCode::data_error);
}
inline Error dimension_mismatch_error(const std::string& msg) {
    return Error("DimensionMismatch", msg, ExitCode::data_error);
}
inline Error insufficient_pairs_error(const std::string& msg) {
    return Error("InsufficientPairs", msg, ExitCode::data_error);
}
inline Error unreadable_input_error(const std::string& msg) {
    return Error("UnreadableInput", msg, ExitCode::data_error);
}
inline Error extractor_failure_error(const std::string& msg) {
    return Error("ExtractorFailure", msg, ExitCode::data_error);
}
inline Error config_error(const std::string& msg) {
    return Error("ConfigError", msg, ExitCode::config_error);
}
inline Error format_error(const std::string& msg) {
    return Error("FormatError", msg, ExitCode::data_error);
}

}  // namespace idface
