#pragma once

#include <stdexcept>
#include <string>

namespace catlm {

// Every failure mode the pipeline can report. The CLI maps these to exit
// codes; library code throws CatlmError and never calls exit().
enum class Err {
    IoError,
    ConfigError,
    // corpus
    EmptyCorpus,
    EncodingError,
    // charlm
    DivergedTraining,
    DegenerateVocab,
    UnknownCharId,
    BadCheckpoint,
    // babbler
    StalledBabbling,
    // treebank
    MalformedLine,
    MalformedTree,
    CyclicTree,
    MultiRooted,
    AnnotatorFailed,
    // catenae
    OracleTooLarge,
    // constructicon
    EmptyConstructicon,
    UnknownCatena,
    InconsistentMarginal,
    TooFewItems,
    // semspace
    DegenerateMatrix,
    InvalidDimension,
    UnknownTarget,
    ZeroVector,
    // stats
    ShapeError,
    UndefinedCorrelation,
    // abstraction
    DegenerateBinning,
    // cli
    ManifestMismatch,
    LockHeld,
};

const char* err_name(Err code);

class CatlmError : public std::runtime_error {
public:
    CatlmError(Err code, const std::string& message)
        : std::runtime_error(std::string(err_name(code)) + ": " + message), code_(code) {}

    Err code() const { return code_; }

private:
    Err code_;
};

[[noreturn]] inline void raise(Err code, const std::string& message) {
    throw CatlmError(code, message);
}

inline void require(bool cond, Err code, const std::string& message) {
    if (!cond) raise(code, message);
}

}  // namespace catlm
