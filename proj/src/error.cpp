#include "txnet/error.hpp"

namespace txnet {

const char* errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Parse: return "Parse";
    case Errc::MarkerAbsent: return "MarkerAbsent";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::ZeroLibrarySize: return "ZeroLibrarySize";
    case Errc::NoSharedGenes: return "NoSharedGenes";
    case Errc::NoResidualDf: return "NoResidualDf";
    case Errc::NotNested: return "NotNested";
    case Errc::PValueOutOfRange: return "PValueOutOfRange";
    case Errc::TooFewPairs: return "TooFewPairs";
    case Errc::EmptyGeneSubset: return "EmptyGeneSubset";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::TooFewCases: return "TooFewCases";
    case Errc::MissingVariable: return "MissingVariable";
    case Errc::ContradictoryEdge: return "ContradictoryEdge";
    case Errc::EmptyGraph: return "EmptyGraph";
    case Errc::Io: return "Io";
    case Errc::MissingArtifact: return "MissingArtifact";
    case Errc::DigestMismatch: return "DigestMismatch";
    case Errc::InfeasibleScenario: return "InfeasibleScenario";
    }
    return "Unknown";
}

const char* parse_error_name(ParseError::Kind kind) noexcept {
    using K = ParseError::Kind;
    switch (kind) {
    case K::EmptyFile: return "EmptyFile";
    case K::BadHeader: return "BadHeader";
    case K::DuplicateGeneId: return "DuplicateGeneId";
    case K::DuplicateSampleId: return "DuplicateSampleId";
    case K::NegativeCount: return "NegativeCount";
    case K::NonIntegerCount: return "NonIntegerCount";
    case K::RaggedRow: return "RaggedRow";
    case K::BadValue: return "BadValue";
    case K::MissingColumn: return "MissingColumn";
    case K::DuplicateKey: return "DuplicateKey";
    }
    return "Unknown";
}

namespace {

std::string format_parse(ParseError::Kind kind, const std::string& path, std::size_t line,
                         const std::string& detail) {
    std::string out = parse_error_name(kind);
    out += '(';
    out += detail;
    out += ')';
    if (!path.empty()) {
        out += " in ";
        out += path;
    }
    if (line > 0) {
        out += " at line ";
        out += std::to_string(line);
    }
    return out;
}

} // namespace

ParseError::ParseError(Kind kind, std::string path, std::size_t line, const std::string& detail)
    : Error(Errc::Parse, format_parse(kind, path, line, detail)), kind_(kind), path_(std::move(path)),
      line_(line) {}

} // namespace txnet
