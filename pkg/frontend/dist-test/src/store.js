/**
 * Snapshot-version guard shared by every view.
 *
 * The service tags each response with the dataset version it was computed
 * against. Views must call `accept(version)` before rendering a response:
 * anything older than the newest version already seen is stale (a slower
 * response that lost a race with an edit) and must be dropped, never drawn.
 */
export class SessionStore {
    version = -1;
    listeners = new Set();
    discardedCount = 0;
    get currentVersion() {
        return this.version;
    }
    /** Record a version the session is known to have reached (e.g. after an edit). */
    advanceTo(version) {
        if (version > this.version) {
            this.version = version;
            this.emit();
        }
    }
    /**
     * Gate a response for rendering. Returns false (and counts the drop)
     * when the response predates the session's current version.
     */
    accept(version) {
        if (version < this.version) {
            this.discardedCount += 1;
            return false;
        }
        this.advanceTo(version);
        return true;
    }
    subscribe(listener) {
        this.listeners.add(listener);
        return () => this.listeners.delete(listener);
    }
    emit() {
        for (const l of this.listeners)
            l();
    }
}
