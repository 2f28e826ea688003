def upcoming(path):
    events = parse_ics(load(path))
    return [e for e in events if e.starts_soon()]
