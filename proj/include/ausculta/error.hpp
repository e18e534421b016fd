/*
 * Copyright 2026 The AuscultaBase Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ausculta {

enum class Errc {
  kMalformedContainer,
  kUnsupportedEncoding,
  kEmptyAudio,
  kInvalidFrequencyRange,
  kClipTooShort,
  kDuplicateRecordId,
  kUnknownDatasetId,
  kMissingAudioFile,
  kLabelOutOfRange,
  kNonIntegerCount,
  kBatchSizeTooSmall,
  kNonFiniteActivation,
  kNonFiniteGradient,
  kNonFiniteLoss,
  kDimMismatch,
  kNoLabeledData,
  kEmptyEvaluation,
  kShapeMismatch,
  kSingleClassOnly,
  kIncompleteColumn,
  kEmptyGroup,
  kInvalidArgument,
  kSchemaError,
  kIoError,
};

std::string_view ErrcName(Errc code);

// Process exit code class of an error: 1 config, 2 data, 3 numeric.
int ExitCodeFor(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void Fail(Errc code, const std::string& message);

}  // namespace ausculta
