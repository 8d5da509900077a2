#ifndef TXNET_ERROR_HPP
#define TXNET_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace txnet {

enum class Errc {
    InvalidArgument,
    Parse,
    MarkerAbsent,
    TooFewSamples,
    ZeroLibrarySize,
    NoSharedGenes,
    NoResidualDf,
    NotNested,
    PValueOutOfRange,
    TooFewPairs,
    EmptyGeneSubset,
    NonConvergence,
    RankDeficient,
    TooFewCases,
    MissingVariable,
    ContradictoryEdge,
    EmptyGraph,
    Io,
    MissingArtifact,
    DigestMismatch,
    InfeasibleScenario,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/**
 * Malformed input file. Carries the 1-based line number of the offending row
 * (0 when the problem is not tied to a line, e.g. an empty file).
 */
class ParseError : public Error {
public:
    enum class Kind {
        EmptyFile,
        BadHeader,
        DuplicateGeneId,
        DuplicateSampleId,
        NegativeCount,
        NonIntegerCount,
        RaggedRow,
        BadValue,
        MissingColumn,
        DuplicateKey,
    };

    ParseError(Kind kind, std::string path, std::size_t line, const std::string& detail);

    Kind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }
    const std::string& path() const noexcept { return path_; }

private:
    Kind kind_;
    std::string path_;
    std::size_t line_;
};

const char* parse_error_name(ParseError::Kind kind) noexcept;

} // namespace txnet

#endif
