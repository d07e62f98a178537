// Error types shared by all modules. The CLI maps Error subclasses to
// exit code 1 and prints name(): message on stderr.
#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>

namespace hybridrec {

class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& msg)
      : std::runtime_error(msg), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

#define HYBRIDREC_DEFINE_ERROR(NAME)                      \
  class NAME : public Error {                             \
   public:                                                \
    explicit NAME(const std::string& msg)                 \
        : Error(#NAME, msg) {}                            \
  }

// corpus_ingest
HYBRIDREC_DEFINE_ERROR(MalformedRecord);
HYBRIDREC_DEFINE_ERROR(EmptyDataset);
HYBRIDREC_DEFINE_ERROR(DuplicateAppId);
HYBRIDREC_DEFINE_ERROR(FieldOutOfRange);
HYBRIDREC_DEFINE_ERROR(UnknownLabelValue);
// doc_builder
HYBRIDREC_DEFINE_ERROR(MissingUserMetadata);
HYBRIDREC_DEFINE_ERROR(UnknownApp);
// embedding
HYBRIDREC_DEFINE_ERROR(EmptyVocabulary);
HYBRIDREC_DEFINE_ERROR(IndexOutOfRange);
HYBRIDREC_DEFINE_ERROR(ConfigInvalid);
HYBRIDREC_DEFINE_ERROR(NonFiniteUpdate);
HYBRIDREC_DEFINE_ERROR(AllTokensOOV);
HYBRIDREC_DEFINE_ERROR(IoFailure);
HYBRIDREC_DEFINE_ERROR(FormatVersionMismatch);
// baselines
HYBRIDREC_DEFINE_ERROR(EmptyCorpus);
HYBRIDREC_DEFINE_ERROR(RankDeficient);
// recsys
HYBRIDREC_DEFINE_ERROR(ZeroVector);
HYBRIDREC_DEFINE_ERROR(DimensionMismatch);
HYBRIDREC_DEFINE_ERROR(UnknownTag);
// lookalike
HYBRIDREC_DEFINE_ERROR(SourceMissingUser);
HYBRIDREC_DEFINE_ERROR(EmptyIntersection);
HYBRIDREC_DEFINE_ERROR(SingleClassTrainingSet);
HYBRIDREC_DEFINE_ERROR(SingleClassEvalSet);
HYBRIDREC_DEFINE_ERROR(FoldClassStarvation);
// synth
HYBRIDREC_DEFINE_ERROR(InfeasibleConfig);

#undef HYBRIDREC_DEFINE_ERROR

// Non-fatal conditions (dropped users, filtered labels) go through a
// replaceable sink so tests and the CLI can capture them.
inline std::function<void(const std::string&)>& warn_handler() {
  static std::function<void(const std::string&)> handler =
      [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; };
  return handler;
}

inline void warn(const std::string& msg) { warn_handler()(msg); }

}  // namespace hybridrec
