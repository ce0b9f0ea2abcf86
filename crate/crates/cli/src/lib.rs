//! Library side of the `gpfsp` binary, exposed so the HTTP service can be
//! exercised in tests without binding a socket.

pub mod serve;
