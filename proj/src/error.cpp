#include "catlm/error.hpp"

namespace catlm {

const char* err_name(Err code) {
    switch (code) {
        case Err::IoError: return "IoError";
        case Err::ConfigError: return "ConfigError";
        case Err::EmptyCorpus: return "EmptyCorpus";
        case Err::EncodingError: return "EncodingError";
        case Err::DivergedTraining: return "DivergedTraining";
        case Err::DegenerateVocab: return "DegenerateVocab";
        case Err::UnknownCharId: return "UnknownCharId";
        case Err::BadCheckpoint: return "BadCheckpoint";
        case Err::StalledBabbling: return "StalledBabbling";
        case Err::MalformedLine: return "MalformedLine";
        case Err::MalformedTree: return "MalformedTree";
        case Err::CyclicTree: return "CyclicTree";
        case Err::MultiRooted: return "MultiRooted";
        case Err::AnnotatorFailed: return "AnnotatorFailed";
        case Err::OracleTooLarge: return "OracleTooLarge";
        case Err::EmptyConstructicon: return "EmptyConstructicon";
        case Err::UnknownCatena: return "UnknownCatena";
        case Err::InconsistentMarginal: return "InconsistentMarginal";
        case Err::TooFewItems: return "TooFewItems";
        case Err::DegenerateMatrix: return "DegenerateMatrix";
        case Err::InvalidDimension: return "InvalidDimension";
        case Err::UnknownTarget: return "UnknownTarget";
        case Err::ZeroVector: return "ZeroVector";
        case Err::ShapeError: return "ShapeError";
        case Err::UndefinedCorrelation: return "UndefinedCorrelation";
        case Err::DegenerateBinning: return "DegenerateBinning";
        case Err::ManifestMismatch: return "ManifestMismatch";
        case Err::LockHeld: return "LockHeld";
    }
    return "UnknownError";
}

}  // namespace catlm
