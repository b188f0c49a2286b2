// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace kerntuner {

/// Base class for all tuner failures. Subclasses give each contract
/// violation a distinct, catchable type.
struct TunerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define KERNTUNER_DEFINE_ERROR(NAME)          \
  struct NAME : TunerError {                  \
    using TunerError::TunerError;             \
  }

// kernel model
KERNTUNER_DEFINE_ERROR(ShapeMismatch);
KERNTUNER_DEFINE_ERROR(NonFiniteInput);
KERNTUNER_DEFINE_ERROR(EmptyKeySet);
KERNTUNER_DEFINE_ERROR(UnknownKernel);

// templates
KERNTUNER_DEFINE_ERROR(UnknownParam);
KERNTUNER_DEFINE_ERROR(ValueNotInCandidates);
KERNTUNER_DEFINE_ERROR(MissingParam);

// hardware / feasibility
KERNTUNER_DEFINE_ERROR(EmptySpace);

// executors
KERNTUNER_DEFINE_ERROR(PlanInvalid);
KERNTUNER_DEFINE_ERROR(InfeasibleAssignment);
KERNTUNER_DEFINE_ERROR(ExecTimeout);
KERNTUNER_DEFINE_ERROR(ExecNonZeroExit);
KERNTUNER_DEFINE_ERROR(ProtocolParseError);

// verification / measurement
KERNTUNER_DEFINE_ERROR(EmptySuite);
KERNTUNER_DEFINE_ERROR(InvalidProtocol);
KERNTUNER_DEFINE_ERROR(MissingSpecializedEntry);

// search
KERNTUNER_DEFINE_ERROR(NonPositiveValue);
KERNTUNER_DEFINE_ERROR(EmptyList);
KERNTUNER_DEFINE_ERROR(NoFeasibleCandidatePassed);
KERNTUNER_DEFINE_ERROR(EmptyPool);

// agents / rewrite providers
KERNTUNER_DEFINE_ERROR(UnknownDirectiveForKernel);
KERNTUNER_DEFINE_ERROR(ProviderTimeout);
KERNTUNER_DEFINE_ERROR(ProviderMalformedReply);

// configuration / CLI
KERNTUNER_DEFINE_ERROR(ConfigError);

#undef KERNTUNER_DEFINE_ERROR

}  // namespace kerntuner
