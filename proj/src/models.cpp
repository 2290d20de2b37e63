namespace rs {
}
