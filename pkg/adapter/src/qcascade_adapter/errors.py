class AdapterError(Exception):
    """Any adapter failure: bad config, unreadable inputs, model problems."""
