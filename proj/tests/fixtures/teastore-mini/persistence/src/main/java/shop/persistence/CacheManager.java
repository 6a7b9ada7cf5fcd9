package shop.persistence;

public class CacheManager {
    private boolean maintenanceMode;

    public synchronized void setMaintenanceModeInternal(boolean mode) {
        this.maintenanceMode = mode;
    }

    public boolean isMaintenanceMode() {
        return maintenanceMode;
    }
}
