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

#include "ausculta/error.hpp"

namespace ausculta {

std::string_view ErrcName(Errc code) {
  switch (code) {
    case Errc::kMalformedContainer: return "MalformedContainer";
    case Errc::kUnsupportedEncoding: return "UnsupportedEncoding";
    case Errc::kEmptyAudio: return "EmptyAudio";
    case Errc::kInvalidFrequencyRange: return "InvalidFrequencyRange";
    case Errc::kClipTooShort: return "ClipTooShort";
    case Errc::kDuplicateRecordId: return "DuplicateRecordId";
    case Errc::kUnknownDatasetId: return "UnknownDatasetId";
    case Errc::kMissingAudioFile: return "MissingAudioFile";
    case Errc::kLabelOutOfRange: return "LabelOutOfRange";
    case Errc::kNonIntegerCount: return "NonIntegerCount";
    case Errc::kBatchSizeTooSmall: return "BatchSizeTooSmall";
    case Errc::kNonFiniteActivation: return "NonFiniteActivation";
    case Errc::kNonFiniteGradient: return "NonFiniteGradient";
    case Errc::kNonFiniteLoss: return "NonFiniteLoss";
    case Errc::kDimMismatch: return "DimMismatch";
    case Errc::kNoLabeledData: return "NoLabeledData";
    case Errc::kEmptyEvaluation: return "EmptyEvaluation";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kSingleClassOnly: return "SingleClassOnly";
    case Errc::kIncompleteColumn: return "IncompleteColumn";
    case Errc::kEmptyGroup: return "EmptyGroup";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kSchemaError: return "SchemaError";
    case Errc::kIoError: return "IoError";
  }
  return "Unknown";
}

int ExitCodeFor(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument:
    case Errc::kSchemaError:
    case Errc::kBatchSizeTooSmall:
    case Errc::kInvalidFrequencyRange:
      return 1;
    case Errc::kNonFiniteActivation:
    case Errc::kNonFiniteGradient:
    case Errc::kNonFiniteLoss:
      return 3;
    default:
      return 2;
  }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(ErrcName(code)) + ": " + message),
      code_(code) {}

void Fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace ausculta
