//! Book chapters as doctests; filled in once the book exists.
