package shop.persistence;

import javax.servlet.http.HttpServlet;

public class DatabaseServlet extends HttpServlet {
    private CacheManager cache = new CacheManager();
    private OrderDAO orders = new OrderDAO();

    public void doGet(HttpRequest req) {
        orders.loadAll(req);
    }

    public void doPost(HttpRequest req) {
        cache.setMaintenanceModeInternal(true);
    }
}
