namespace qdl {
}
