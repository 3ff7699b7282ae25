#include "fuzztwin/common/error.hpp"

namespace fuzztwin {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::FieldOutOfRange: return "FieldOutOfRange";
        case ErrorKind::IntegrityError: return "IntegrityError";
        case ErrorKind::MalformedFrame: return "MalformedFrame";
        case ErrorKind::OffsetOutOfRange: return "OffsetOutOfRange";
        case ErrorKind::PeerDisconnected: return "PeerDisconnected";
        case ErrorKind::PortBindFailure: return "PortBindFailure";
        case ErrorKind::EmptyPool: return "EmptyPool";
        case ErrorKind::RowExhausted: return "RowExhausted";
        case ErrorKind::UnknownField: return "UnknownField";
        case ErrorKind::StorageFull: return "StorageFull";
        case ErrorKind::CorruptRecord: return "CorruptRecord";
        case ErrorKind::EmptyStore: return "EmptyStore";
        case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::NoFailedTraces: return "NoFailedTraces";
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::NonPositiveValues: return "NonPositiveValues";
        case ErrorKind::EmptySequence: return "EmptySequence";
        case ErrorKind::IndexOutOfVocab: return "IndexOutOfVocab";
        case ErrorKind::SingleClass: return "SingleClass";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace fuzztwin
